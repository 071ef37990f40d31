#include "cvlasso/solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cvlasso/error.hpp"

namespace cvlasso {

const char* to_string(Method m) noexcept
{
    switch (m) {
    case Method::OLS: return "OLS";
    case Method::LASSO: return "LASSO";
    case Method::FSR: return "FSR";
    }
    return "UNKNOWN";
}

std::vector<double> make_lambdas(const GridSpec& grid, double lambda_max, bool allow_zero)
{
    if (grid.num_points < 2)
        throw Error(Errc::InvalidArgument, "grid needs at least 2 points");
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max))
        throw Error(Errc::InvalidArgument, "lambda_max must be finite and nonnegative");

    std::vector<double> out;
    if (lambda_max == 0.0) {
        out.push_back(0.0);
        return out;
    }
    if (grid.mode == GridMode::Geometric) {
        if (!(grid.min_ratio > 0.0 && grid.min_ratio < 1.0))
            throw Error(Errc::InvalidArgument, "geometric grid needs min_ratio in (0, 1)");
        const double last = static_cast<double>(grid.num_points - 1);
        for (int k = 0; k < grid.num_points; ++k)
            out.push_back(lambda_max * std::pow(grid.min_ratio, static_cast<double>(k) / last));
    } else {
        if (grid.step < 0.0)
            throw Error(Errc::InvalidArgument, "linear grid step must be positive");
        const double step = grid.step > 0.0 ? grid.step : lambda_max / grid.num_points;
        for (int k = 0; k < grid.num_points; ++k) {
            const double lam = lambda_max - k * step;
            if (lam <= 0.0) break;
            out.push_back(lam);
        }
    }
    if (grid.include_zero && allow_zero)
        out.push_back(0.0);
    return out;
}

std::vector<Index> support_of(const Eigen::VectorXd& b)
{
    std::vector<Index> s;
    for (Index j = 0; j < b.size(); ++j)
        if (b(j) != 0.0) s.push_back(j);
    return s;
}

namespace {

FitResult finish(const Dataset& d, Eigen::VectorXd b, double lambda, Method m, int iterations, bool converged)
{
    FitResult f;
    f.training_error = (d.y - d.X * b).squaredNorm() / static_cast<double>(d.n());
    f.support = support_of(b);
    f.coefficients = std::move(b);
    f.lambda = lambda;
    f.method = m;
    f.iterations = iterations;
    f.converged = converged;
    return f;
}

} // namespace

FitResult ols_fit(const Dataset& train)
{
    const Index n = train.n();
    const Index p = train.p();
    if (n < p)
        throw Error(Errc::RankDeficient, "OLS needs n >= p (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");

    const Eigen::MatrixXd gram = train.X.transpose() * train.X / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 1e-10 * hi))
        throw Error(Errc::RankDeficient, "X^T X is numerically singular");

    Eigen::VectorXd b = train.X.colPivHouseholderQr().solve(train.y);
    return finish(train, std::move(b), 0.0, Method::OLS, 1, true);
}

FitResult lasso_fit(const Dataset& train, double lambda, const LassoOptions& opts)
{
    return lasso_fit(train, lambda, Eigen::VectorXd::Zero(train.p()), opts);
}

FitResult lasso_fit(const Dataset& train, double lambda, const Eigen::VectorXd& start, const LassoOptions& opts)
{
    if (!(lambda >= 0.0))
        throw Error(Errc::InvalidArgument, "lambda must be nonnegative");
    if (start.size() != train.p())
        throw Error(Errc::DimensionMismatch, "warm start has wrong length");
    if (lambda == 0.0 && opts.exact_at_zero && train.n() > train.p()) {
        try {
            auto ols = ols_fit(train);
            return finish(train, std::move(ols.coefficients), 0.0, Method::LASSO, 0, true);
        } catch (const Error& e) {
            if (e.code() != Errc::RankDeficient) throw;
        }
    }
    Eigen::VectorXd b = start;
    const auto outcome = lasso_coordinate_descent(train.X, train.y, lambda, b, opts.tol, opts.max_iter, opts.on_sweep,
                                                  opts.kkt_tol);
    return finish(train, std::move(b), lambda, Method::LASSO, outcome.sweeps, outcome.converged);
}

double lambda_max(const Dataset& train)
{
    return lambda_max(train.X, train.y);
}

std::vector<FitResult> lasso_path(const Dataset& train, std::span<const double> lambdas, const LassoOptions& opts)
{
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] < lambdas[i - 1]))
            throw Error(Errc::InvalidArgument, "lambda sequence must be strictly decreasing");

    std::vector<FitResult> path;
    path.reserve(lambdas.size());
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(train.p());
    for (double lam : lambdas) {
        path.push_back(lasso_fit(train, lam, warm, opts));
        warm = path.back().coefficients;
    }
    return path;
}

std::vector<FitResult> lasso_path(const Dataset& train, const GridSpec& grid, const LassoOptions& opts)
{
    const auto lambdas = make_lambdas(grid, lambda_max(train), train.n() > train.p());
    return lasso_path(train, lambdas, opts);
}

FitResult fsr_fit(const Dataset& train, const FsrOptions& opts)
{
    const Index n = train.n();
    const Index p = train.p();
    const Index cap = std::min(n - 1, p);
    Index max_vars = opts.max_vars <= 0 ? cap : opts.max_vars;
    if (max_vars < 1 || max_vars > cap)
        throw Error(Errc::InvalidArgument, "max_vars must lie in [1, min(n-1, p)]");

    const auto& X = train.X;
    const Eigen::RowVectorXd col_mean = X.colwise().mean();
    Eigen::VectorXd centered_norm(p);
    for (Index j = 0; j < p; ++j)
        centered_norm(j) = (X.col(j).array() - col_mean(j)).matrix().norm();

    Eigen::MatrixXd Q(n, max_vars);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(max_vars, max_vars);
    std::vector<Index> selected;
    std::vector<char> excluded(static_cast<std::size_t>(p), 0);
    Eigen::VectorXd r = train.y;

    while (static_cast<Index>(selected.size()) < max_vars) {
        const double r_mean = r.mean();
        const double r_norm = (r.array() - r_mean).matrix().norm();
        if (!(r_norm > 0.0)) break;
        const Eigen::VectorXd xr = X.transpose() * r;

        // Try candidates in order of decreasing correlation until one is independent.
        bool added = false;
        while (!added) {
            Index best = -1;
            double best_corr = -1.0;
            for (Index j = 0; j < p; ++j) {
                if (excluded[static_cast<std::size_t>(j)] || centered_norm(j) <= 0.0) continue;
                const double c = std::abs(xr(j) - static_cast<double>(n) * col_mean(j) * r_mean) /
                                 (centered_norm(j) * r_norm);
                if (c > best_corr) {
                    best_corr = c;
                    best = j;
                }
            }
            if (best < 0 || best_corr < opts.corr_threshold) break;

            const Index k = static_cast<Index>(selected.size());
            Eigen::VectorXd q = X.col(best);
            const double col_norm = q.norm();
            // Two passes of Gram-Schmidt against the basis so far.
            for (int pass = 0; pass < 2; ++pass) {
                for (Index i = 0; i < k; ++i) {
                    const double proj = Q.col(i).dot(q);
                    R(i, k) += proj;
                    q -= proj * Q.col(i);
                }
            }
            const double rest = q.norm();
            excluded[static_cast<std::size_t>(best)] = 1;
            if (!(rest > 1e-10 * col_norm)) {
                R.col(k).setZero();
                continue;
            }
            R(k, k) = rest;
            Q.col(k) = q / rest;
            r -= Q.col(k) * Q.col(k).dot(r);
            selected.push_back(best);
            added = true;
        }
        if (!added) break;
    }

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    const auto k = static_cast<Index>(selected.size());
    if (k > 0) {
        const Eigen::VectorXd qty = Q.leftCols(k).transpose() * train.y;
        const Eigen::VectorXd coef = R.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(qty);
        for (Index i = 0; i < k; ++i)
            b(selected[static_cast<std::size_t>(i)]) = coef(i);
    }
    return finish(train, std::move(b), 0.0, Method::FSR, static_cast<int>(k), true);
}

FitResult extremum_fit(const Dataset& train, const FsrOptions& fsr)
{
    if (train.n() > train.p()) {
        try {
            return ols_fit(train);
        } catch (const Error& e) {
            if (e.code() != Errc::RankDeficient) throw;
        }
    }
    return fsr_fit(train, fsr);
}

} // namespace cvlasso
