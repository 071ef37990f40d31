#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "cvlasso/data.hpp"
#include "cvlasso/error.hpp"
#include "oracles.hpp"

using namespace cvlasso;

namespace {

Dataset small(std::initializer_list<double> col0, std::initializer_list<double> ys)
{
    Eigen::MatrixXd X(static_cast<Index>(col0.size()), 1);
    Index i = 0;
    for (double v : col0)
        X(i++, 0) = v;
    Eigen::VectorXd y(static_cast<Index>(ys.size()));
    i = 0;
    for (double v : ys)
        y(i++) = v;
    return Dataset::from(X, y);
}

Errc code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::InvalidArgument;
}

std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("cvlasso_test_" + name);
}

} // namespace

TEST_CASE("standardize: hand example")
{
    const auto d = small({1, 2, 3}, {1, 0, 2});
    const auto [s, params] = standardize(d);
    CHECK(s.standardized);
    CHECK(s.X(0, 0) == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-14));
    CHECK(std::abs(s.X(1, 0)) < 1e-15);
    CHECK(s.X(2, 0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
    CHECK(params.col_means(0) == doctest::Approx(2.0));
    CHECK(params.col_scales(0) == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("standardize: invariants on random data match a longhand transform")
{
    std::mt19937_64 rng(11);
    const auto d = oracle::random_instance(rng, 40, 7);
    const auto [s, params] = standardize(d);
    Eigen::MatrixXd X = d.X;
    Eigen::VectorXd y = d.y;
    oracle::standardize_longhand(X, y);
    CHECK((s.X - X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.y - y).cwiseAbs().maxCoeff() < 1e-12);
    for (Index j = 0; j < s.p(); ++j) {
        CHECK(std::abs(s.X.col(j).mean()) < 1e-10);
        CHECK(std::abs(s.X.col(j).squaredNorm() / 40.0 - 1.0) < 1e-10);
    }
    CHECK(std::abs(s.y.mean()) < 1e-10);
    CHECK(std::abs(s.y.squaredNorm() / 40.0 - 1.0) < 1e-10);
}

TEST_CASE("standardize: identity params leave standardized data unchanged")
{
    std::mt19937_64 rng(12);
    const auto [s, params] = standardize(oracle::random_instance(rng, 30, 4));
    auto again = apply_standardization(s, StandardizationParams::identity(4));
    CHECK((again.X - s.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((again.y - s.y).cwiseAbs().maxCoeff() == 0.0);
    // Standardizing an already standardized copy is also a fixed point up to rounding.
    Dataset raw = Dataset::from(s.X, s.y);
    const auto [s2, p2] = standardize(raw);
    CHECK((s2.X - s.X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p2.col_scales.isApprox(Eigen::VectorXd::Ones(4), 1e-12));
}

TEST_CASE("standardize: errors")
{
    CHECK(code_of([] { standardize(small({5, 5, 5}, {1, 2, 3})); }) == Errc::ConstantColumn);
    CHECK(code_of([] { standardize(small({1, 2, 3}, {4, 4, 4})); }) == Errc::ConstantColumn);
    CHECK(code_of([] { Dataset::from(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)); }) == Errc::EmptyData);
    CHECK(code_of([] { Dataset::from(Eigen::MatrixXd::Ones(3, 2), Eigen::VectorXd::Ones(2)); }) ==
          Errc::DimensionMismatch);
}

TEST_CASE("apply_standardization uses the supplied moments")
{
    StandardizationParams params;
    params.col_means = Eigen::VectorXd::Constant(1, 2.0);
    params.col_scales = Eigen::VectorXd::Constant(1, 1.0);
    params.y_mean = 0.0;
    params.y_scale = 1.0;
    const auto t = apply_standardization(small({3}, {0}), params);
    CHECK(t.X(0, 0) == 1.0);
    CHECK_FALSE(t.standardized);

    // A test set with a shifted mean keeps a nonzero mean after the training transform.
    const auto train = small({0, 1, 2, 3}, {1, 2, 3, 5});
    const auto test = small({10, 11, 12}, {1, 2, 4});
    const auto [s, pr] = standardize(train);
    const auto ts = apply_standardization(test, pr);
    CHECK(std::abs(ts.X.col(0).mean()) > 1e-10);

    StandardizationParams wrong = StandardizationParams::identity(3);
    CHECK(code_of([&] { apply_standardization(train, wrong); }) == Errc::DimensionMismatch);
}

TEST_CASE("to_raw_coefficients undoes the scaling")
{
    std::mt19937_64 rng(13);
    const auto raw = oracle::random_instance(rng, 200, 3, 0.0);
    const auto [s, params] = standardize(raw);
    const Eigen::VectorXd b = oracle::least_squares(s.X, s.y);
    const Eigen::VectorXd b_raw = to_raw_coefficients(b, s);
    // With zero noise the raw-unit slopes reproduce y up to the intercept.
    const Eigen::VectorXd fitted = raw.X * b_raw;
    const Eigen::VectorXd resid = raw.y - fitted;
    CHECK((resid.array() - resid.mean()).abs().maxCoeff() < 1e-9);
}

TEST_CASE("split_validation")
{
    std::mt19937_64 rng(14);
    const auto d = oracle::random_instance(rng, 10, 2);
    auto [tr, te] = split_validation(d, 0.8, 3);
    CHECK(tr.n() == 8);
    CHECK(te.n() == 2);
    auto [tr2, te2] = split_validation(d, 0.8, 3);
    CHECK(tr.X == tr2.X);
    CHECK(te.y == te2.y);
    auto [a, b] = split_validation(d, 0.99, 3);
    CHECK(a.n() == 9);
    CHECK(b.n() == 1);

    // Union of the two parts is all rows, with no repeats.
    std::multiset<double> all(d.y.data(), d.y.data() + d.n());
    std::multiset<double> got(tr.y.data(), tr.y.data() + tr.n());
    got.insert(te.y.data(), te.y.data() + te.n());
    CHECK(all == got);

    CHECK(code_of([&] { split_validation(d, 0.05, 1); }) == Errc::DegenerateSplit);
    CHECK(code_of([&] { split_validation(d, 1.0, 1); }) == Errc::InvalidArgument);
}

TEST_CASE("kfold_plan: sizes, partition, determinism")
{
    auto sizes = [](const FoldPlan& p) {
        auto s = p.fold_sizes();
        std::sort(s.begin(), s.end(), std::greater<>());
        return s;
    };
    CHECK(sizes(kfold_plan(10, 5, 1)) == std::vector<Index>{2, 2, 2, 2, 2});
    CHECK(sizes(kfold_plan(10, 3, 1)) == std::vector<Index>{4, 3, 3});
    CHECK(sizes(kfold_plan(7, 7, 1)) == std::vector<Index>(7, 1));

    const auto plan = kfold_plan(53, 6, 99);
    CHECK(plan.assignment == kfold_plan(53, 6, 99).assignment);
    CHECK(plan.assignment != kfold_plan(53, 6, 100).assignment);
    std::vector<int> seen(53, 0);
    for (int f = 0; f < 6; ++f) {
        for (Index i : plan.test_rows(f))
            ++seen[static_cast<std::size_t>(i)];
        CHECK(plan.test_rows(f).size() + plan.train_rows(f).size() == 53);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

    CHECK(code_of([] { kfold_plan(10, 1, 1); }) == Errc::BadK);
    CHECK(code_of([] { kfold_plan(10, 11, 1); }) == Errc::BadK);
}

TEST_CASE("stream_seed separates masters, replications and purposes")
{
    std::set<std::uint64_t> seeds;
    for (std::uint64_t m : {0ull, 1ull, 2ull, 7ull})
        for (std::uint64_t r = 0; r < 50; ++r)
            for (auto s : {Stream::Train, Stream::Test, Stream::Folds, Stream::Split, Stream::Perturb})
                seeds.insert(stream_seed(m, r, s));
    CHECK(seeds.size() == 4 * 50 * 5);
}

TEST_CASE("simulate_dgp: structure and determinism")
{
    SimulationConfig cfg;
    cfg.n = 50;
    cfg.p = 12;
    const auto a = simulate_dgp(cfg, 3);
    const auto b = simulate_dgp(cfg, 3);
    CHECK(a.data.X == b.data.X);
    CHECK(a.data.y == b.data.y);
    CHECK(a.beta.head(6) == Eigen::VectorXd(Eigen::VectorXd::LinSpaced(6, 2, 12)));
    CHECK(a.beta.tail(6).isZero(0));
    CHECK(simulate_dgp(cfg, 4).data.X != a.data.X);
    CHECK(simulate_dgp(cfg, 3, Stream::Test).data.X != a.data.X);
    CHECK(simulate_dgp(cfg, 3, Stream::Test, 17).data.n() == 17);

    cfg.noise_sd = 0.0;
    cfg.validate();
    const auto exact = simulate_dgp(cfg, 0);
    CHECK((exact.data.y - exact.data.X * exact.beta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simulate_dgp: moments at n = 10000")
{
    SimulationConfig cfg;
    cfg.n = 10000;
    cfg.p = 8;
    const auto d = simulate_dgp(cfg, 0).data;
    const double n = static_cast<double>(cfg.n);
    Eigen::MatrixXd C = d.X.rowwise() - d.X.colwise().mean();
    const Eigen::MatrixXd cov = C.transpose() * C / n;
    for (Index j = 0; j < cfg.p; ++j) {
        CHECK(std::abs(d.X.col(j).mean()) < 0.05);
        CHECK(std::abs(cov(j, j) - 1.0) < 0.05);
        for (Index k = j + 1; k < cfg.p; ++k)
            CHECK(std::abs(cov(j, k) / std::sqrt(cov(j, j) * cov(k, k)) - 0.9) < 0.02);
    }

    cfg.corr = 0.0;
    const auto ind = simulate_dgp(cfg, 1).data;
    Eigen::MatrixXd C0 = ind.X.rowwise() - ind.X.colwise().mean();
    const Eigen::MatrixXd cov0 = C0.transpose() * C0 / n;
    CHECK(std::abs(cov0(0, 1) / std::sqrt(cov0(0, 0) * cov0(1, 1))) < 4.0 / std::sqrt(n));
}

TEST_CASE("SimulationConfig validation")
{
    SimulationConfig cfg;
    cfg.p = 3;
    CHECK(code_of([&] { cfg.validate(); }) == Errc::InvalidArgument);
    cfg = {};
    cfg.corr = 1.0;
    CHECK(code_of([&] { cfg.validate(); }) == Errc::InvalidArgument);
    cfg = {};
    cfg.replications = 0;
    CHECK(code_of([&] { cfg.validate(); }) == Errc::InvalidArgument);
}

TEST_CASE("csv: round trip and shapes")
{
    SimulationConfig cfg;
    cfg.n = 40;
    cfg.p = 9;
    const auto d = simulate_dgp(cfg, 0).data;
    const auto path = temp_file("roundtrip.csv");
    save_csv(d, path);
    const auto back = load_csv(path);
    CHECK(back.n() == 40);
    CHECK(back.p() == 9);
    CHECK((back.X - d.X).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.y - d.y).cwiseAbs().maxCoeff() < 1e-12);
    std::filesystem::remove(path);

    const auto small_path = temp_file("small.csv");
    {
        std::ofstream out(small_path);
        out << "y,x1\n1,2\n3,4\n5,6\n";
    }
    const auto s = load_csv(small_path);
    CHECK(s.n() == 3);
    CHECK(s.p() == 1);
    CHECK(s.y(2) == 5.0);
    std::filesystem::remove(small_path);
}

TEST_CASE("csv: errors carry positions")
{
    const auto path = temp_file("bad.csv");
    {
        std::ofstream out(path);
        out << "y,x1,x2\n1,2,3\n4,abc,6\n";
    }
    try {
        load_csv(path);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseError);
        CHECK(std::string(e.what()).find("line 3, column 2") != std::string::npos);
    }
    {
        std::ofstream out(path);
        out << "y,x1,x2\n1,2,3\n4,5\n";
    }
    CHECK(code_of([&] { load_csv(path); }) == Errc::DimensionMismatch);
    {
        std::ofstream out(path);
        out << "y,x1\n";
    }
    CHECK(code_of([&] { load_csv(path); }) == Errc::EmptyData);
    std::filesystem::remove(path);
    CHECK(code_of([&] { load_csv(path); }) == Errc::IoError);
}
