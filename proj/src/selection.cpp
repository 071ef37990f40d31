#include "cvlasso/selection.hpp"

#include <algorithm>
#include <limits>

#include "cvlasso/error.hpp"
#include "cvlasso/metrics.hpp"

namespace cvlasso {

const char* to_string(SelectionMethod m) noexcept
{
    return m == SelectionMethod::Holdout ? "HOLDOUT" : "KFOLD";
}

std::size_t argmin_ge(std::span<const CurvePoint> curve)
{
    if (curve.empty())
        throw Error(Errc::InvalidArgument, "empty validation curve");
    // Curve is ordered by decreasing lambda, so the first strict minimum is the largest lambda.
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].mean_ge < curve[best].mean_ge)
            best = i;
    return best;
}

SelectionResult holdout_lasso(const Dataset& train, const Dataset& test, const GridSpec& grid,
                              const LassoOptions& opts)
{
    const auto lambdas = make_lambdas(grid, lambda_max(train), train.n() > train.p());
    return holdout_lasso(train, test, lambdas, opts);
}

SelectionResult holdout_lasso(const Dataset& train, const Dataset& test, std::span<const double> lambdas,
                              const LassoOptions& opts)
{
    if (train.p() != test.p())
        throw Error(Errc::DimensionMismatch, "train and test have different covariate counts");
    auto path = lasso_path(train, lambdas, opts);

    SelectionResult out;
    out.method = SelectionMethod::Holdout;
    out.cv_curve.reserve(path.size());
    for (const auto& fit : path) {
        const double ge = empirical_risk(fit.coefficients, test);
        out.cv_curve.push_back({fit.lambda, ge, {ge}});
    }
    const auto best = argmin_ge(out.cv_curve);
    out.lambda_star = out.cv_curve[best].lambda;
    out.chosen = path[best];
    out.fold_fits = {path[best]};

    out.plan.K = 2;
    out.plan.assignment.assign(static_cast<std::size_t>(train.n()), 0);
    out.plan.assignment.resize(static_cast<std::size_t>(train.n() + test.n()), 1);

    out.params.col_means = train.col_means;
    out.params.col_scales = train.col_scales;
    out.params.y_mean = train.y_mean;
    out.params.y_scale = train.y_scale;
    return out;
}

SelectionResult cv_lasso(const Dataset& d, int K, const GridSpec& grid, std::uint64_t seed,
                         const LassoOptions& opts)
{
    const auto plan = kfold_plan(d.n(), K, seed);
    const auto [full, params] = standardize(d);
    const auto sizes = plan.fold_sizes();
    const Index largest_fold = *std::max_element(sizes.begin(), sizes.end());
    const bool allow_zero = d.n() - largest_fold > d.p();
    const auto lambdas = make_lambdas(grid, lambda_max(full), allow_zero);
    return cv_lasso(d, plan, lambdas, opts);
}

SelectionResult cv_lasso(const Dataset& d, const FoldPlan& plan, std::span<const double> lambdas,
                         const LassoOptions& opts)
{
    if (plan.n() != d.n())
        throw Error(Errc::DimensionMismatch, "fold plan does not cover the dataset");
    if (plan.K < 2)
        throw Error(Errc::BadK, "cross-validation needs K >= 2");
    if (lambdas.empty())
        throw Error(Errc::InvalidArgument, "empty lambda grid");

    const auto L = lambdas.size();
    const auto K = static_cast<std::size_t>(plan.K);
    std::vector<std::vector<double>> ge(L, std::vector<double>(K, 0.0));
    std::vector<std::vector<FitResult>> paths(K);

    for (std::size_t q = 0; q < K; ++q) {
        const auto train_idx = plan.train_rows(static_cast<int>(q));
        const auto test_idx = plan.test_rows(static_cast<int>(q));
        const auto [train, params] = standardize(d.rows(train_idx));
        const auto test = apply_standardization(d.rows(test_idx), params);
        paths[q] = lasso_path(train, lambdas, opts);
        for (std::size_t l = 0; l < L; ++l)
            ge[l][q] = empirical_risk(paths[q][l].coefficients, test);
    }

    SelectionResult out;
    out.method = SelectionMethod::KFold;
    out.plan = plan;
    out.cv_curve.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        double sum = 0.0;
        for (std::size_t q = 0; q < K; ++q)
            sum += ge[l][q];
        out.cv_curve.push_back({lambdas[l], sum / static_cast<double>(K), ge[l]});
    }
    const auto best = argmin_ge(out.cv_curve);
    out.lambda_star = lambdas[best];
    for (std::size_t q = 0; q < K; ++q)
        out.fold_fits.push_back(paths[q][best]);

    // Refit along the grid down to lambda_star so the final solve is warm-started.
    auto [full, params] = standardize(d);
    auto refit = lasso_path(full, lambdas.first(best + 1), opts);
    out.chosen = std::move(refit.back());
    out.params = std::move(params);
    return out;
}

std::vector<FitResult> fold_extremum_fits(const Dataset& d, const FoldPlan& plan, const FsrOptions& fsr)
{
    if (plan.n() != d.n())
        throw Error(Errc::DimensionMismatch, "fold plan does not cover the dataset");
    std::vector<FitResult> fits;
    fits.reserve(static_cast<std::size_t>(plan.K));
    for (int k = 0; k < plan.K; ++k) {
        const auto idx = plan.train_rows(k);
        fits.push_back(extremum_fit(d.rows(idx), fsr));
    }
    return fits;
}

WorstFold worst_fold(const Dataset& d, const FoldPlan& plan, std::span<const FitResult> fold_fits)
{
    if (static_cast<int>(fold_fits.size()) != plan.K)
        throw Error(Errc::DimensionMismatch, "need one extremum fit per fold");
    if (plan.n() != d.n())
        throw Error(Errc::DimensionMismatch, "fold plan does not cover the dataset");

    std::vector<Dataset> held_out;
    held_out.reserve(static_cast<std::size_t>(plan.K));
    for (int q = 0; q < plan.K; ++q) {
        const auto idx = plan.test_rows(q);
        held_out.push_back(d.rows(idx));
    }

    WorstFold out;
    out.ge.resize(plan.K, plan.K);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < plan.K; ++k) {
        for (int q = 0; q < plan.K; ++q) {
            const double v = empirical_risk(fold_fits[static_cast<std::size_t>(k)].coefficients,
                                            held_out[static_cast<std::size_t>(q)]);
            out.ge(k, q) = v;
            if (v > worst) {
                worst = v;
                out.k = k;
                out.q = q;
            }
        }
    }
    out.b_train = fold_fits[static_cast<std::size_t>(out.k)].coefficients;
    return out;
}

} // namespace cvlasso
