#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvlasso/data.hpp"
#include "cvlasso/grid.hpp"
#include "cvlasso/solvers.hpp"

namespace cvlasso {

enum class SelectionMethod { Holdout, KFold };

const char* to_string(SelectionMethod m) noexcept;

struct CurvePoint {
    double lambda = 0.0;
    double mean_ge = 0.0;
    std::vector<double> fold_ge;
};

struct SelectionResult {
    /// Fit at lambda_star on the full (standardized) sample.
    FitResult chosen;
    double lambda_star = 0.0;
    /// Strictly decreasing in lambda.
    std::vector<CurvePoint> cv_curve;
    FoldPlan plan;
    SelectionMethod method = SelectionMethod::KFold;
    /// Per-fold Lasso fits at lambda_star, each on its fold's own standardized scale.
    std::vector<FitResult> fold_fits;
    /// Moments used to standardize the sample `chosen` was refit on.
    StandardizationParams params;
};

/// Index of the smallest mean GE; equal values resolve to the largest lambda.
std::size_t argmin_ge(std::span<const CurvePoint> curve);

/// Validation: path on `train`, GE of each fit on `test` (already transformed with
/// train's moments), keep the minimizer. The grid comes from train's lambda_max.
SelectionResult holdout_lasso(const Dataset& train, const Dataset& test, const GridSpec& grid,
                              const LassoOptions& opts = {});
SelectionResult holdout_lasso(const Dataset& train, const Dataset& test, std::span<const double> lambdas,
                              const LassoOptions& opts = {});

/// K-fold CV-Lasso. Each fold's training part is standardized with its own moments and
/// its held-out fold with the same moments. The grid comes from the fully standardized
/// sample (lambda = 0 only when every fold's training part has n_t > p), and the final
/// model is refit at lambda_star on the full standardized sample.
SelectionResult cv_lasso(const Dataset& d, int K, const GridSpec& grid, std::uint64_t seed,
                         const LassoOptions& opts = {});
SelectionResult cv_lasso(const Dataset& d, const FoldPlan& plan, std::span<const double> lambdas,
                         const LassoOptions& opts = {});

/// Unpenalized fit (OLS, or FSR when n_t <= p) on each fold's training rows of d,
/// in d's own coordinates. Feeds worst_fold and the cross-validated bounds.
std::vector<FitResult> fold_extremum_fits(const Dataset& d, const FoldPlan& plan, const FsrOptions& fsr = {});

struct WorstFold {
    int k = 0;
    int q = 0;
    Eigen::VectorXd b_train;
    /// ge(k, q): GE of fold k's extremum fit on held-out fold q.
    Eigen::MatrixXd ge;
};

/// argmax over (k, q) of R_{n_s}(b_train^k | X_s^q, Y_s^q); ties go to the smallest (k, q).
WorstFold worst_fold(const Dataset& d, const FoldPlan& plan, std::span<const FitResult> fold_fits);

} // namespace cvlasso
