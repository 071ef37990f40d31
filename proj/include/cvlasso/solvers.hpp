#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvlasso/data.hpp"
#include "cvlasso/grid.hpp"

namespace cvlasso {

enum class Method { OLS, LASSO, FSR };

const char* to_string(Method m) noexcept;

struct FitResult {
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    std::vector<Index> support;
    /// (1/n_t) ||Y_t - X_t b||^2 on the data the fit was computed from.
    double training_error = 0.0;
    Method method = Method::LASSO;
    int iterations = 0;
    bool converged = true;
};

struct LassoOptions {
    double tol = 1e-7;
    int max_iter = 10'000;
    /// Called with the iterate after every sweep (full or active-set). Mostly for tests.
    std::function<void(const Eigen::VectorXd&)> on_sweep;
    /// At lambda = 0 with n > p, solve least squares directly instead of sweeping
    /// (coordinate descent crawls on ill-conditioned designs). Falls back to sweeps if rank deficient.
    bool exact_at_zero = true;
    /// A sweep only counts as converged when the KKT violation is also at most this (0 disables).
    double kkt_tol = 1e-6;
};

struct FsrOptions {
    double corr_threshold = 1e-4;
    /// <= 0 means min(n_t - 1, p).
    Index max_vars = 0;
};

template <typename Scalar>
inline Scalar soft_threshold(Scalar z, Scalar t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return Scalar(0);
}

/// Smallest lambda whose minimizer of (1/n)||y - Xb||^2 + lambda ||b||_1 is zero.
template <typename DX, typename DY>
typename DX::Scalar lambda_max(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y)
{
    using Scalar = typename DX::Scalar;
    const Scalar n = static_cast<Scalar>(X.rows());
    return Scalar(2) * (X.transpose() * y).cwiseAbs().maxCoeff() / n;
}

/// Penalized objective (1/n)||y - Xb||^2 + lambda ||b||_1.
template <typename DX, typename DY, typename DB>
typename DX::Scalar lasso_objective(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                    const Eigen::MatrixBase<DB>& b, typename DX::Scalar lambda)
{
    const auto n = static_cast<typename DX::Scalar>(X.rows());
    return (y - X * b).squaredNorm() / n + lambda * b.template lpNorm<1>();
}

/// Largest violation of the Lasso optimality conditions at b:
/// |g_j| <= lambda where b_j = 0, g_j = lambda sign(b_j) elsewhere, g = (2/n) X^T (y - Xb).
template <typename DX, typename DY, typename DB>
typename DX::Scalar kkt_violation(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                  const Eigen::MatrixBase<DB>& b, typename DX::Scalar lambda)
{
    using Scalar = typename DX::Scalar;
    const Scalar n = static_cast<Scalar>(X.rows());
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g = Scalar(2) * X.transpose() * (y - X * b) / n;
    Scalar worst = 0;
    for (Index j = 0; j < b.size(); ++j) {
        const Scalar v = b(j) == Scalar(0) ? std::max(Scalar(0), std::abs(g(j)) - lambda)
                                           : std::abs(g(j) - lambda * (b(j) > 0 ? Scalar(1) : Scalar(-1)));
        worst = std::max(worst, v);
    }
    return worst;
}

template <typename Scalar>
struct CdOutcome {
    int sweeps = 0;
    bool converged = false;
};

/// Cyclic coordinate descent on (1/n)||y - Xb||^2 + lambda ||b||_1, starting from b.
///
/// Update: b_j <- S(rho_j, lambda/2) / c_j with rho_j = (1/n) x_j^T (y - sum_{k != j} x_k b_k)
/// and c_j = (1/n) x_j^T x_j (= 1 on standardized data). After each full sweep the
/// active coefficients are iterated to convergence before the next full sweep; the
/// run is converged when a full sweep moves no coefficient by tol or more.
template <typename DX, typename DY, typename Scalar = typename DX::Scalar>
CdOutcome<Scalar> lasso_coordinate_descent(const Eigen::MatrixBase<DX>& X, const Eigen::MatrixBase<DY>& y,
                                           Scalar lambda, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                                           Scalar tol, int max_iter,
                                           const std::function<void(const Eigen::VectorXd&)>& on_sweep = {},
                                           Scalar kkt_tol = Scalar(0))
{
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index p = X.cols();
    const Scalar n = static_cast<Scalar>(X.rows());
    const Vec col_sq = X.colwise().squaredNorm().transpose() / n;
    Vec r = y - X * b;
    const Scalar half_lambda = lambda / Scalar(2);

    auto update = [&](Index j) -> Scalar {
        const Scalar old = b(j);
        if (col_sq(j) <= Scalar(0)) {
            b(j) = 0;
            return std::abs(old);
        }
        const Scalar rho = X.col(j).dot(r) / n + col_sq(j) * old;
        const Scalar fresh = soft_threshold(rho, half_lambda) / col_sq(j);
        if (fresh != old) {
            r.noalias() -= X.col(j) * (fresh - old);
            b(j) = fresh;
        }
        return std::abs(fresh - old);
    };
    auto notify = [&] {
        if (on_sweep) on_sweep(b.template cast<double>());
    };

    CdOutcome<Scalar> out;
    std::vector<Index> active;
    Scalar inner_tol = tol;
    while (out.sweeps < max_iter) {
        Scalar max_change = 0;
        for (Index j = 0; j < p; ++j)
            max_change = std::max(max_change, update(j));
        ++out.sweeps;
        notify();
        // Small steps alone can stall short of the optimum on correlated designs, so the
        // subgradient conditions are checked too when kkt_tol > 0.
        if (max_change < tol) {
            if (kkt_tol <= Scalar(0) || kkt_violation(X, y, b, lambda) <= kkt_tol) {
                out.converged = true;
                break;
            }
            inner_tol = std::max(inner_tol / Scalar(10), std::numeric_limits<Scalar>::epsilon());
        }
        active.clear();
        for (Index j = 0; j < p; ++j)
            if (b(j) != Scalar(0) && col_sq(j) > Scalar(0)) active.push_back(j);
        if (active.empty()) continue;

        // Active-set passes work on the small Gram block, so each update costs O(|A|) rather than O(n).
        const Index m = static_cast<Index>(active.size());
        Mat XA(X.rows(), m);
        for (Index i = 0; i < m; ++i)
            XA.col(i) = X.col(active[static_cast<std::size_t>(i)]);
        const Mat G = XA.transpose() * XA / n;
        Vec g = XA.transpose() * r / n;
        while (out.sweeps < max_iter) {
            Scalar inner = 0;
            for (Index i = 0; i < m; ++i) {
                const Index j = active[static_cast<std::size_t>(i)];
                const Scalar old = b(j);
                const Scalar fresh = soft_threshold(g(i) + G(i, i) * old, half_lambda) / G(i, i);
                if (fresh != old) {
                    g.noalias() -= G.col(i) * (fresh - old);
                    b(j) = fresh;
                    inner = std::max(inner, std::abs(fresh - old));
                }
            }
            ++out.sweeps;
            notify();
            if (inner < inner_tol) break;
        }
        r = y - X * b;
    }
    return out;
}

std::vector<Index> support_of(const Eigen::VectorXd& b);

/// Least squares on all columns. Throws RankDeficient when n < p or the smallest
/// eigenvalue of (1/n) X^T X is at most 1e-10 times the largest.
FitResult ols_fit(const Dataset& train);

FitResult lasso_fit(const Dataset& train, double lambda, const LassoOptions& opts = {});

/// Same, warm-started from `start`.
FitResult lasso_fit(const Dataset& train, double lambda, const Eigen::VectorXd& start,
                    const LassoOptions& opts = {});

double lambda_max(const Dataset& train);

/// One fit per lambda (given in strictly decreasing order), each warm-started from the previous.
std::vector<FitResult> lasso_path(const Dataset& train, std::span<const double> lambdas,
                                  const LassoOptions& opts = {});

/// Grid built from the training set's lambda_max; lambda = 0 only when n_t > p.
std::vector<FitResult> lasso_path(const Dataset& train, const GridSpec& grid, const LassoOptions& opts = {});

/// Forward selection: repeatedly add the unselected column with the largest absolute
/// correlation with the current residual (ties to the lowest index) and refit least
/// squares on the selected set. Stops when that correlation drops below
/// corr_threshold or max_vars columns are in. Candidates that are linearly
/// dependent on the selected set are skipped.
FitResult fsr_fit(const Dataset& train, const FsrOptions& opts = {});

/// OLS when n_t > p and the design is well conditioned, FSR otherwise.
FitResult extremum_fit(const Dataset& train, const FsrOptions& fsr = {});

} // namespace cvlasso
