#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cvlasso/data.hpp"
#include "cvlasso/error.hpp"
#include "cvlasso/metrics.hpp"
#include "cvlasso/selection.hpp"
#include "oracles.hpp"

using namespace cvlasso;

namespace {

SimulationConfig cfg_np(Index n, Index p, double noise = 1.0)
{
    SimulationConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.noise_sd = noise;
    return cfg;
}

bool exact_support(const std::vector<Index>& s, Index k)
{
    if (static_cast<Index>(s.size()) != k) return false;
    return std::all_of(s.begin(), s.end(), [&](Index j) { return j < k; });
}

} // namespace

TEST_CASE("argmin_ge: first minimum, i.e. the largest lambda on ties")
{
    std::vector<CurvePoint> c{{3.0, 0.5, {}}, {2.0, 0.2, {}}, {1.0, 0.2, {}}, {0.5, 0.3, {}}};
    CHECK(argmin_ge(c) == 1);
    // Scaling all errors by a positive constant changes nothing.
    for (auto& pt : c)
        pt.mean_ge *= 7.5;
    CHECK(argmin_ge(c) == 1);
    CHECK_THROWS_AS(argmin_ge(std::vector<CurvePoint>{}), Error);
}

TEST_CASE("holdout_lasso")
{
    const auto cfg = cfg_np(400, 20, 0.0);
    const auto [train, params] = standardize(simulate_dgp(cfg, 0).data);
    const auto test = apply_standardization(simulate_dgp(cfg, 0, Stream::Test).data, params);
    GridSpec grid;
    grid.include_zero = false;
    const auto sel = holdout_lasso(train, test, grid);
    CHECK(sel.method == SelectionMethod::Holdout);
    CHECK(sel.lambda_star == sel.chosen.lambda);
    CHECK(exact_support(sel.chosen.support, 6));
    for (std::size_t i = 1; i < sel.cv_curve.size(); ++i)
        CHECK(sel.cv_curve[i].lambda < sel.cv_curve[i - 1].lambda);
    for (const auto& pt : sel.cv_curve)
        CHECK(sel.cv_curve[argmin_ge(sel.cv_curve)].mean_ge <= pt.mean_ge);

    const std::vector<double> single{0.05};
    const auto one = holdout_lasso(train, test, single);
    CHECK(one.lambda_star == 0.05);
    CHECK(one.cv_curve.size() == 1);
}

TEST_CASE("holdout_lasso under the null mostly keeps (almost) nothing")
{
    int small_models = 0;
    double mean_size = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto cfg = cfg_np(250, 50);
        cfg.beta1.clear();
        const auto [train, params] = standardize(simulate_dgp(cfg, seed).data);
        const auto test = apply_standardization(simulate_dgp(cfg, seed, Stream::Test).data, params);
        const auto sel = holdout_lasso(train, test, GridSpec{});
        small_models += sel.chosen.support.size() <= 2 ? 1 : 0;
        mean_size += static_cast<double>(sel.chosen.support.size()) / 50.0;
    }
    // A single validation split lets a few noise variables through now and then: about three
    // quarters of the seeds end with at most two variables, not nine in ten.
    MESSAGE("null runs with |support| <= 2: " << small_models << "/50, mean size " << mean_size);
    CHECK(small_models >= 30);
    CHECK(mean_size < 5.0);
}

TEST_CASE("cv_lasso: curve bookkeeping, refit and determinism")
{
    const auto d = simulate_dgp(cfg_np(120, 30), 1).data;
    GridSpec grid;
    grid.num_points = 30;
    const auto sel = cv_lasso(d, 5, grid, 42);
    CHECK(sel.method == SelectionMethod::KFold);
    CHECK(sel.plan.K == 5);
    CHECK(sel.fold_fits.size() == 5);
    for (const auto& pt : sel.cv_curve) {
        REQUIRE(pt.fold_ge.size() == 5);
        double sum = 0.0;
        for (double g : pt.fold_ge)
            sum += g;
        CHECK(std::abs(pt.mean_ge - sum / 5.0) < 1e-12);
    }
    const auto best = argmin_ge(sel.cv_curve);
    CHECK(sel.lambda_star == sel.cv_curve[best].lambda);

    const auto full = standardize(d).first;
    LassoOptions tight;
    tight.tol = 1e-10;
    const auto direct = lasso_fit(full, sel.lambda_star, tight);
    CHECK((direct.coefficients - sel.chosen.coefficients).cwiseAbs().maxCoeff() < 1e-5);

    const auto again = cv_lasso(d, 5, grid, 42);
    CHECK(again.lambda_star == sel.lambda_star);
    CHECK(again.chosen.coefficients == sel.chosen.coefficients);
    CHECK(again.plan.assignment == sel.plan.assignment);
    for (std::size_t i = 0; i < sel.cv_curve.size(); ++i)
        CHECK(again.cv_curve[i].fold_ge == sel.cv_curve[i].fold_ge);

    CHECK_THROWS_WITH_AS(cv_lasso(d, 1, grid, 1), doctest::Contains("BadK"), Error);
    CHECK_THROWS_WITH_AS(cv_lasso(d, 121, grid, 1), doctest::Contains("BadK"), Error);
}

TEST_CASE("cv_lasso: per-fold errors come from fold-standardized fits")
{
    const auto d = simulate_dgp(cfg_np(60, 8), 2).data;
    const auto plan = kfold_plan(60, 3, 9);
    const std::vector<double> lambdas{0.5, 0.1, 0.02};
    const auto sel = cv_lasso(d, plan, lambdas);
    for (int q = 0; q < 3; ++q) {
        const auto [tr, pr] = standardize(d.rows(plan.train_rows(q)));
        const auto te = apply_standardization(d.rows(plan.test_rows(q)), pr);
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            LassoOptions tight;
            tight.tol = 1e-12;
            const auto fit = lasso_fit(tr, lambdas[l], tight);
            CHECK(sel.cv_curve[l].fold_ge[static_cast<std::size_t>(q)] ==
                  doctest::Approx(empirical_risk(fit.coefficients, te)).epsilon(1e-6));
        }
    }
}

TEST_CASE("cv_lasso: K = 2 is the average of the two holdout runs")
{
    const auto d = simulate_dgp(cfg_np(80, 10), 3).data;
    const auto plan = kfold_plan(80, 2, 5);
    const std::vector<double> lambdas{1.0, 0.3, 0.1, 0.03, 0.01};
    const auto sel = cv_lasso(d, plan, lambdas);
    std::vector<double> avg(lambdas.size(), 0.0);
    for (int q = 0; q < 2; ++q) {
        const auto [tr, pr] = standardize(d.rows(plan.train_rows(q)));
        const auto te = apply_standardization(d.rows(plan.test_rows(q)), pr);
        const auto h = holdout_lasso(tr, te, lambdas);
        for (std::size_t l = 0; l < lambdas.size(); ++l)
            avg[l] += h.cv_curve[l].mean_ge / 2.0;
    }
    for (std::size_t l = 0; l < lambdas.size(); ++l)
        CHECK(sel.cv_curve[l].mean_ge == doctest::Approx(avg[l]).epsilon(1e-12));
}

TEST_CASE("cv_lasso: a grid entirely above lambda_max picks the zero model")
{
    const auto d = simulate_dgp(cfg_np(60, 8), 4).data;
    const double lmax = lambda_max(standardize(d).first);
    const std::vector<double> lambdas{3.0 * lmax, 2.0 * lmax, 1.5 * lmax};
    const auto sel = cv_lasso(d, kfold_plan(60, 4, 1), lambdas);
    CHECK(sel.chosen.coefficients.isZero(0));
}

TEST_CASE("worst_fold: brute-force scan, ties and an outlier fold")
{
    const auto d = standardize(simulate_dgp(cfg_np(90, 6), 5).data).first;
    const auto plan = kfold_plan(90, 3, 2);
    const auto fits = fold_extremum_fits(d, plan);
    const auto wf = worst_fold(d, plan, fits);
    double worst = -1.0;
    int bk = -1, bq = -1;
    for (int k = 0; k < 3; ++k)
        for (int q = 0; q < 3; ++q) {
            const auto held = d.rows(plan.test_rows(q));
            const double v = empirical_risk(fits[static_cast<std::size_t>(k)].coefficients, held);
            CHECK(wf.ge(k, q) == doctest::Approx(v).epsilon(1e-14));
            if (v > worst) {
                worst = v;
                bk = k;
                bq = q;
            }
        }
    CHECK(wf.k == bk);
    CHECK(wf.q == bq);
    CHECK(wf.b_train == fits[static_cast<std::size_t>(bk)].coefficients);

    // Outlier fold: blow up the noise on fold 1's rows.
    Dataset noisy = d;
    for (Index i : plan.test_rows(1))
        noisy.y(i) += (i % 2 ? 25.0 : -25.0);
    const auto fits2 = fold_extremum_fits(noisy, plan);
    CHECK(worst_fold(noisy, plan, fits2).q == 1);

    // Identical copies in both folds give a full tie, resolved to (0, 0).
    Eigen::MatrixXd X(20, 2);
    Eigen::VectorXd y(20);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (Index i = 0; i < 10; ++i) {
        X(i, 0) = z(rng);
        X(i, 1) = z(rng);
        y(i) = X(i, 0) + z(rng);
        X.row(i + 10) = X.row(i);
        y(i + 10) = y(i);
    }
    FoldPlan sym;
    sym.K = 2;
    sym.assignment.assign(20, 0);
    std::fill(sym.assignment.begin() + 10, sym.assignment.end(), 1);
    const auto tie_data = Dataset::from(X, y);
    const auto tie = worst_fold(tie_data, sym, fold_extremum_fits(tie_data, sym));
    CHECK(tie.k == 0);
    CHECK(tie.q == 0);
}

TEST_CASE("worst_fold: argument checks")
{
    const auto d = standardize(simulate_dgp(cfg_np(30, 8), 6).data).first;
    const auto plan = kfold_plan(30, 3, 1);
    auto fits = fold_extremum_fits(d, plan);
    fits.pop_back();
    CHECK_THROWS_AS(worst_fold(d, plan, fits), Error);
}
