#include "cvlasso/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "cvlasso/error.hpp"
#include "cvlasso/metrics.hpp"
#include "cvlasso/selection.hpp"

namespace cvlasso {

namespace {

// Runs body(i) for i in [0, count); results go to caller-owned slots so order never matters.
template <typename Body>
void parallel_for(int count, unsigned threads, Body body)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (failure) std::rethrow_exception(failure);
}

MethodMetrics metrics_for(const Eigen::VectorXd& b, const Dataset& train, const Dataset& test,
                          const Eigen::VectorXd& beta)
{
    const auto m = evaluate_fit(b, train, test);
    MethodMetrics out;
    out.bias = bias_l2(to_raw_coefficients(b, train), beta);
    out.training_error = m.training_error;
    out.generalization_error = m.generalization_error;
    out.r2_in = m.r2_train;
    out.r2_out = m.r2_test;
    out.gr2 = m.gr2;
    return out;
}

Index nonzero_count(const SimulationConfig& cfg)
{
    return static_cast<Index>(cfg.beta1.size());
}

} // namespace

MethodMetrics mean_metrics(const std::vector<ReplicationRow>& rows, bool lasso)
{
    MethodMetrics sum;
    for (const auto& row : rows) {
        const auto& m = lasso ? row.lasso : row.comparator;
        sum.bias += m.bias;
        sum.training_error += m.training_error;
        sum.generalization_error += m.generalization_error;
        sum.r2_in += m.r2_in;
        sum.r2_out += m.r2_out;
        sum.gr2 += m.gr2;
    }
    const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    sum.bias /= n;
    sum.training_error /= n;
    sum.generalization_error /= n;
    sum.r2_in /= n;
    sum.r2_out /= n;
    sum.gr2 /= n;
    return sum;
}

ReplicationRow run_replication(const SimulationConfig& cfg, int replication, const ExperimentOptions& opts)
{
    const auto rep = static_cast<std::uint64_t>(replication);
    const Index test_rows = opts.test_size > 0 ? opts.test_size : cfg.n;
    const auto train_draw = simulate_dgp(cfg, rep, Stream::Train);
    const auto test_draw = simulate_dgp(cfg, rep, Stream::Test, test_rows);
    const Eigen::VectorXd& beta = train_draw.beta;

    const auto selection =
        cv_lasso(train_draw.data, cfg.K, cfg.lambda_grid, stream_seed(cfg.seed, rep, Stream::Folds), opts.lasso);
    const auto [train, params] = standardize(train_draw.data);
    const auto test = apply_standardization(test_draw.data, params);
    const FitResult comparator = extremum_fit(train, opts.fsr);

    const Eigen::VectorXd& b_lasso = selection.chosen.coefficients;
    ReplicationRow row;
    row.replication = replication;
    row.lambda_star = selection.lambda_star;
    row.lasso_support_size = static_cast<Index>(selection.chosen.support.size());
    row.comparator_support_size = static_cast<Index>(comparator.support.size());
    const Index s = nonzero_count(cfg);
    row.exact_support = row.lasso_support_size == s;
    for (Index j : selection.chosen.support)
        row.exact_support = row.exact_support && j < s;
    row.lasso = metrics_for(b_lasso, train, test, beta);
    row.comparator = metrics_for(comparator.coefficients, train, test, beta);

    const Eigen::VectorXd raw_lasso = to_raw_coefficients(b_lasso, train);
    const Eigen::VectorXd raw_comp = to_raw_coefficients(comparator.coefficients, train);
    std::vector<Index> zeros(static_cast<std::size_t>(cfg.p - s));
    std::iota(zeros.begin(), zeros.end(), s);
    const auto worst = std::min<std::size_t>(4, zeros.size());
    std::partial_sort(zeros.begin(), zeros.begin() + static_cast<std::ptrdiff_t>(worst), zeros.end(),
                      [&](Index a, Index b) {
                          const double fa = std::abs(raw_comp(a)), fb = std::abs(raw_comp(b));
                          return fa != fb ? fa > fb : a < b;
                      });
    const Index tracked_nonzero = std::min<Index>(s, 6);
    for (Index j = 0; j < tracked_nonzero; ++j) {
        row.lasso_tracked[static_cast<std::size_t>(j)] = raw_lasso(j);
        row.comparator_tracked[static_cast<std::size_t>(j)] = raw_comp(j);
    }
    for (std::size_t w = 0; w < worst; ++w) {
        row.worst_zero[w] = zeros[w];
        row.lasso_tracked[6 + w] = raw_lasso(zeros[w]);
        row.comparator_tracked[6 + w] = raw_comp(zeros[w]);
    }
    return row;
}

ExperimentReport run_experiment(const SimulationConfig& cfg, const ExperimentOptions& opts)
{
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;
    report.test_size = opts.test_size > 0 ? opts.test_size : cfg.n;
    report.comparator = cfg.n > cfg.p ? Method::OLS : Method::FSR;
    report.rows.resize(static_cast<std::size_t>(cfg.replications));
    parallel_for(cfg.replications, opts.threads, [&](int i) {
        report.rows[static_cast<std::size_t>(i)] = run_replication(cfg, opts.first_replication + i, opts);
    });
    report.lasso_mean = mean_metrics(report.rows, true);
    report.comparator_mean = mean_metrics(report.rows, false);
    int exact = 0;
    for (const auto& row : report.rows)
        exact += row.exact_support ? 1 : 0;
    report.support_recovery_rate = static_cast<double>(exact) / static_cast<double>(report.rows.size());
    return report;
}

std::vector<ExperimentReport> run_table1(const SimulationConfig& base, const std::vector<Index>& p_list,
                                         const ExperimentOptions& opts)
{
    std::vector<ExperimentReport> out;
    for (Index p : p_list) {
        SimulationConfig cfg = base;
        cfg.p = p;
        out.push_back(run_experiment(cfg, opts));
    }
    return out;
}

namespace {

// Exact risk of b (on the standardized scale of `train`) under the equicorrelated Gaussian design.
double population_risk(const Eigen::VectorXd& b, const Dataset& train, const SimulationConfig& cfg)
{
    const Eigen::VectorXd b_raw = to_raw_coefficients(b, train);
    const Eigen::VectorXd diff = cfg.beta() - b_raw;
    const double sum = diff.sum();
    const double quad = (1.0 - cfg.corr) * diff.squaredNorm() + cfg.corr * sum * sum;
    const double offset = train.col_means.dot(b_raw) - train.y_mean;
    return (quad + cfg.noise_sd * cfg.noise_sd + offset * offset) / (train.y_scale * train.y_scale);
}

BoundReport coverage_once(const SimulationConfig& cfg, BoundName bound, int replication, const CoverageOptions& opts)
{
    const auto rep = static_cast<std::uint64_t>(replication);
    const auto draw = simulate_dgp(cfg, rep, Stream::Train);

    switch (bound) {
    case BoundName::Corollary2:
    case BoundName::Corollary3:
    case BoundName::Corollary4: {
        const auto [d, params] = standardize(draw.data);
        const auto plan = kfold_plan(d.n(), cfg.K, stream_seed(cfg.seed, rep, Stream::Folds));
        auto selection = cv_lasso(d, cfg.K, cfg.lambda_grid, stream_seed(cfg.seed, rep, Stream::Folds), opts.lasso);
        const auto fits = fold_extremum_fits(d, plan, opts.fsr);
        if (opts.force_lasso_equal_train)
            selection.chosen.coefficients = worst_fold(d, plan, fits).b_train;
        const auto mode = bound == BoundName::Corollary2   ? CvBoundMode::Prediction
                          : bound == BoundName::Corollary3 ? CvBoundMode::MinEigenvalue
                                                           : CvBoundMode::RestrictedEigenvalue;
        return cv_prediction_bound(d, selection, fits, mode, opts.bound, opts.support_size);
    }
    default: break;
    }

    const Index test_rows = opts.test_size > 0 ? opts.test_size : cfg.n;
    const auto test_draw = simulate_dgp(cfg, rep, Stream::Test, test_rows);
    const auto [train, params] = standardize(draw.data);
    const auto test = apply_standardization(test_draw.data, params);

    const FitResult b_train = bound == BoundName::Theorem3 ? ols_fit(train) : extremum_fit(train, opts.fsr);
    if (bound == BoundName::Lemma1)
        return lemma1_bound(b_train.coefficients, train, population_risk(b_train.coefficients, train, cfg));
    if (bound == BoundName::Theorem1)
        return theorem1_bound(b_train.coefficients, train, test, opts.bound);

    const Eigen::VectorXd b_lasso = opts.force_lasso_equal_train
                                        ? b_train.coefficients
                                        : holdout_lasso(train, test, cfg.lambda_grid, opts.lasso).chosen.coefficients;
    if (bound == BoundName::Theorem2)
        return theorem2_bound(b_train.coefficients, b_lasso, train, test, opts.bound);
    if (bound == BoundName::Theorem3)
        return theorem3_bound(b_train.coefficients, b_lasso, train, test, opts.bound);
    return theorem4_bound(b_train.coefficients, b_lasso, train, test, opts.bound, opts.support_size);
}

void check_regime(const SimulationConfig& cfg, BoundName bound)
{
    const Index n = cfg.n;
    const Index p = cfg.p;
    // Training size inside a fold: n minus the largest fold.
    const Index fold_train = n - (n + cfg.K - 1) / std::max(cfg.K, 1);
    auto mismatch = [&](const std::string& why) {
        throw Error(Errc::RegimeMismatch, std::string(to_string(bound)) + " at n=" + std::to_string(n) +
                                              ", p=" + std::to_string(p) + ": " + why);
    };
    switch (bound) {
    case BoundName::Theorem3:
        if (n <= p) mismatch("needs n > p (OLS as the unpenalized fit)");
        break;
    case BoundName::Theorem4:
        if (p <= n) mismatch("needs p > n (FSR as the unpenalized fit)");
        break;
    case BoundName::Corollary3:
        // rho comes from the held-out folds' Gram matrices, so every fold must have more rows than p.
        if (n / std::max(cfg.K, 1) <= p) mismatch("needs every held-out fold larger than p");
        break;
    case BoundName::Corollary4:
        if (p <= fold_train) mismatch("needs p > fold training size");
        break;
    default: break;
    }
}

} // namespace

CoverageReport run_bound_coverage(const SimulationConfig& cfg, BoundName bound, int replications,
                                  const CoverageOptions& opts)
{
    cfg.validate();
    if (replications < 1)
        throw Error(Errc::InvalidArgument, "coverage needs at least one replication");
    check_regime(cfg, bound);

    CoverageReport out;
    out.bound = bound;
    out.config = cfg;
    out.config.replications = replications;
    out.varpi = opts.bound.varpi;
    out.moment_order = opts.bound.moment_order;
    out.rows.resize(static_cast<std::size_t>(replications));

    parallel_for(replications, opts.threads, [&](int i) {
        auto& row = out.rows[static_cast<std::size_t>(i)];
        row.replication = i;
        try {
            row.report = coverage_once(cfg, bound, i, opts);
            row.computed = true;
        } catch (const Error& e) {
            row.error = std::string(to_string(e.code()));
        }
    });

    for (const auto& row : out.rows) {
        if (row.computed) {
            ++out.computed;
            out.holds += row.report.holds ? 1 : 0;
        } else {
            ++out.failures[row.error];
        }
    }
    out.holds_fraction = static_cast<double>(out.holds) / static_cast<double>(replications);

    const bool k_fold = bound == BoundName::Corollary2 || bound == BoundName::Corollary3 ||
                        bound == BoundName::Corollary4;
    const Index n_t = k_fold ? cfg.n - (cfg.n + cfg.K - 1) / cfg.K : cfg.n;
    out.nominal_prob = bound == BoundName::Lemma1 ? 1.0 - 1.0 / static_cast<double>(n_t)
                                                  : opts.bound.varpi * (1.0 - 1.0 / static_cast<double>(n_t));
    return out;
}

} // namespace cvlasso

namespace cvlasso {

Proposition1Result proposition1_check(const SimulationConfig& cfg, Index test_size, int perturbations,
                                      double radius, int replication)
{
    const auto rep = static_cast<std::uint64_t>(replication);
    const auto draw = simulate_dgp(cfg, rep, Stream::Test, test_size);
    std::mt19937_64 rng(stream_seed(cfg.seed, rep, Stream::Perturb));
    std::normal_distribution<double> normal;

    Proposition1Result out;
    out.risk_at_beta = empirical_risk(draw.beta, draw.data);
    out.perturbed_risks.reserve(static_cast<std::size_t>(perturbations));
    for (int i = 0; i < perturbations; ++i) {
        Eigen::VectorXd delta(cfg.p);
        for (Index j = 0; j < cfg.p; ++j)
            delta(j) = normal(rng);
        delta *= radius / delta.norm();
        const double r = empirical_risk(Eigen::VectorXd(draw.beta + delta), draw.data);
        out.perturbed_risks.push_back(r);
        out.beaten += out.risk_at_beta < r ? 1 : 0;
    }
    return out;
}

double proposition2_rate(const SimulationConfig& cfg, const LassoOptions& opts, unsigned threads)
{
    cfg.validate();
    const Index s = static_cast<Index>(cfg.beta1.size());
    std::vector<char> found(static_cast<std::size_t>(cfg.replications), 0);
    parallel_for(cfg.replications, threads, [&](int i) {
        const auto draw = simulate_dgp(cfg, static_cast<std::uint64_t>(i), Stream::Train);
        const auto [train, params] = standardize(draw.data);
        for (const auto& fit : lasso_path(train, cfg.lambda_grid, opts)) {
            bool exact = static_cast<Index>(fit.support.size()) == s;
            for (Index j : fit.support)
                exact = exact && j < s;
            if (exact) {
                found[static_cast<std::size_t>(i)] = 1;
                break;
            }
        }
    });
    return static_cast<double>(std::count(found.begin(), found.end(), 1)) / static_cast<double>(found.size());
}

} // namespace cvlasso
