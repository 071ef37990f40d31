#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvlasso/bounds.hpp"
#include "cvlasso/data.hpp"
#include "cvlasso/solvers.hpp"

namespace cvlasso {

struct ExperimentOptions {
    /// Fresh held-out rows per replication; <= 0 means cfg.n.
    Index test_size = 0;
    int first_replication = 0;
    /// 0 uses std::thread::hardware_concurrency().
    unsigned threads = 0;
    LassoOptions lasso{};
    FsrOptions fsr{};
};

struct MethodMetrics {
    double bias = 0.0;
    double training_error = 0.0;
    double generalization_error = 0.0;
    double r2_in = 0.0;
    double r2_out = 0.0;
    double gr2 = 0.0;
};

inline constexpr int kTrackedCoefficients = 10;

struct ReplicationRow {
    int replication = 0;
    double lambda_star = 0.0;
    Index lasso_support_size = 0;
    bool exact_support = false;
    Index comparator_support_size = 0;
    MethodMetrics lasso;
    MethodMetrics comparator;
    /// Zero-based indices of the four worst (largest |estimate|) comparator coefficients among the true zeros.
    std::array<Index, 4> worst_zero{};
    /// Raw-unit estimates for the nonzero block followed by the four worst zeros.
    std::array<double, kTrackedCoefficients> lasso_tracked{};
    std::array<double, kTrackedCoefficients> comparator_tracked{};
};

/// One (n, p) cell of the simulation table: CV-Lasso against OLS (n > p) or FSR.
struct ExperimentReport {
    SimulationConfig config;
    Index test_size = 0;
    Method comparator = Method::OLS;
    MethodMetrics lasso_mean;
    MethodMetrics comparator_mean;
    double support_recovery_rate = 0.0;
    std::vector<ReplicationRow> rows;
};

/// Metric means over rows, in row order.
MethodMetrics mean_metrics(const std::vector<ReplicationRow>& rows, bool lasso);

/// One replication: simulate, standardize with training moments, CV-Lasso and the
/// comparator on the training draw, metrics on a fresh test draw. Errors are in
/// standardized units; bias and tracked coefficients in raw units.
ReplicationRow run_replication(const SimulationConfig& cfg, int replication, const ExperimentOptions& opts = {});

ExperimentReport run_experiment(const SimulationConfig& cfg, const ExperimentOptions& opts = {});

/// One report per p in p_list, everything else taken from `base`.
std::vector<ExperimentReport> run_table1(const SimulationConfig& base, const std::vector<Index>& p_list,
                                         const ExperimentOptions& opts = {});

/// Report used for the per-coefficient boxplot and GR^2 histogram files.
inline ExperimentReport run_boxplot_data(const SimulationConfig& cfg, const ExperimentOptions& opts = {})
{
    return run_experiment(cfg, opts);
}

struct CoverageOptions {
    BoundOptions bound{};
    LassoOptions lasso{};
    FsrOptions fsr{};
    /// Fresh validation rows for the holdout bounds; <= 0 means cfg.n.
    Index test_size = 0;
    /// Replace the Lasso fit by the unpenalized fit (zero left-hand side).
    bool force_lasso_equal_train = false;
    std::optional<Index> support_size;
    unsigned threads = 0;
};

struct CoverageRow {
    int replication = 0;
    bool computed = false;
    std::string error;
    BoundReport report;
};

struct CoverageReport {
    BoundName bound = BoundName::Theorem3;
    SimulationConfig config;
    double varpi = 0.0;
    double moment_order = 0.0;
    /// varpi (1 - 1/n_t) for the training size used.
    double nominal_prob = 0.0;
    int computed = 0;
    int holds = 0;
    /// holds / replications; replications whose bound could not be evaluated count as not holding.
    double holds_fraction = 0.0;
    std::map<std::string, int> failures;
    std::vector<CoverageRow> rows;
};

/// Throws RegimeMismatch when the bound does not apply to (cfg.n, cfg.p).
CoverageReport run_bound_coverage(const SimulationConfig& cfg, BoundName bound, int replications,
                                  const CoverageOptions& opts = {});

struct Proposition1Result {
    double risk_at_beta = 0.0;
    /// Empirical risk of beta + delta_i, one entry per perturbation.
    std::vector<double> perturbed_risks;
    int beaten = 0;
};

/// Empirical risk of the true beta against `perturbations` random beta + delta with
/// ||delta||_2 = radius, on one test draw of `test_size` rows (raw units).
Proposition1Result proposition1_check(const SimulationConfig& cfg, Index test_size, int perturbations,
                                      double radius, int replication = 0);

/// Per replication: does some lambda on the path (full sample, standardized) give exactly
/// the true support? Returns the fraction of replications where it does.
double proposition2_rate(const SimulationConfig& cfg, const LassoOptions& opts = {}, unsigned threads = 0);

} // namespace cvlasso
