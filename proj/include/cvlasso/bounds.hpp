#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cvlasso/data.hpp"
#include "cvlasso/error.hpp"
#include "cvlasso/selection.hpp"
#include "cvlasso/solvers.hpp"

namespace cvlasso {

// ---------------------------------------------------------------------------
// VC / SRM quantities
// ---------------------------------------------------------------------------

struct VCParams {
    // Real-valued so the formula can be evaluated off the integers too.
    double h = 1;    ///< VC dimension; p for a linear model on p regressors
    double n_t = 1;  ///< training sample size
    double eta = 0;  ///< 1 - confidence of the VC inequality
};

/// epsilon = (1/n_t) [h ln(n_t / h) + h - ln(eta)].
///
/// The value is returned as is, even when it falls outside [0, 1) (which happens
/// when h is close to or above n_t); vc_bound rejects such values.
double vc_epsilon(const VCParams& params);

/// Default eta = 1 / n_t.
inline VCParams vc_params(Index h, Index n_t)
{
    return {static_cast<double>(h), static_cast<double>(n_t), 1.0 / static_cast<double>(n_t)};
}

/// Upper bound on the population risk from the training error: training_error / (1 - sqrt(epsilon)).
/// Throws EpsilonTooLarge for epsilon >= 1 and NonPositiveRatio for epsilon < 0.
double vc_bound(double training_error, double epsilon);

/// V(n_t) = r_n + tau sqrt(h ln(n_t) / n_t).
double srm_rate(double n_t, double h, double tau, double r_n);

/// Plug-in tail ratio (mean(loss^q))^(1/q) / mean(loss).
double plug_in_tau(std::span<const double> losses, double moment_order);

/// Bahr-Esseen slack between empirical and population GE, with the plug-in tau and
/// the sample mean standing in for the population moments:
/// varsigma = 2^(1/q) tau mean(loss) / ((1 - varpi)^(1/q) n_s^(1 - 1/q)), 1 < q <= 2.
double bahr_esseen_varsigma(std::span<const double> losses, double moment_order, double varpi);

// ---------------------------------------------------------------------------
// Eigenvalue machinery
// ---------------------------------------------------------------------------

/// Smallest eigenvalue of (1/n) X^T X. Values within 1e-10 below zero are clamped to 0.
template <typename DX>
typename DX::Scalar min_eigenvalue(const Eigen::MatrixBase<DX>& X)
{
    using Scalar = typename DX::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat gram = X.transpose() * X / static_cast<Scalar>(X.rows());
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
    const Scalar lo = eig.eigenvalues().minCoeff();
    return lo < Scalar(0) && lo >= Scalar(-1e-10) ? Scalar(0) : lo;
}

double min_eigenvalue(const Dataset& d);

/// Upper limit on the number of supports restricted_eigenvalue will enumerate.
inline constexpr double kSupportBudget = 1e6;

/// Binomial coefficient as a double (exact enough for budget checks).
double choose(Index n, Index k);

/// Minimum, over supports S with |S| <= s, of the smallest eigenvalue of the S x S
/// principal submatrix of `gram`. Interlacing makes the minimum attained at |S| = s,
/// so only those supports are enumerated (exhaustively).
/// Throws TooLargeS when C(p, s) exceeds kSupportBudget.
double restricted_eigenvalue_of_gram(const Eigen::MatrixXd& gram, Index s);

/// Same on (1/n) X^T X. Requires 1 <= s <= min(n, p).
template <typename DX>
double restricted_eigenvalue(const Eigen::MatrixBase<DX>& X, Index s)
{
    if (s < 1 || s > std::min<Index>(X.rows(), X.cols()))
        throw Error(Errc::InvalidArgument, "restricted_eigenvalue: need 1 <= s <= min(n, p)");
    const Eigen::MatrixXd gram = (X.transpose() * X).template cast<double>() / static_cast<double>(X.rows());
    return restricted_eigenvalue_of_gram(gram, s);
}

double restricted_eigenvalue(const Dataset& d, Index s);

// ---------------------------------------------------------------------------
// Bound reports
// ---------------------------------------------------------------------------

enum class BoundName { Lemma1, Theorem1, Theorem2, Theorem3, Theorem4, Corollary2, Corollary3, Corollary4 };

const char* to_string(BoundName b) noexcept;
BoundName bound_from_string(std::string_view s);

/// Summands of the right-hand side (after any bound-specific square roots or scaling),
/// plus the eigenvalue and epsilon that went into them.
struct BoundTerms {
    double overfit_gap = 0.0;
    double cross_term = 0.0;
    double varsigma_term = 0.0;
    double eigenvalue = std::numeric_limits<double>::quiet_NaN();
    double epsilon = 0.0;

    double sum() const { return overfit_gap + cross_term + varsigma_term; }
};

struct BoundReport {
    BoundName name = BoundName::Theorem2;
    double lhs = 0.0;
    double rhs = 0.0;
    BoundTerms terms;
    /// varpi (1 - 1/n_t).
    double nominal_prob = 0.0;
    bool holds = false;
    /// Raw varsigma and the plug-in tau behind it (population moments replaced by sample ones).
    double varsigma = 0.0;
    double tau_hat = 0.0;
    Index n_t = 0;
    Index n_s = 0;
    Index h = 0;
};

struct BoundOptions {
    double varpi = 0.9;
    double moment_order = 2.0;
};

/// Population risk vs. training error: lhs = population_risk, rhs = training_error / (1 - sqrt(eps)).
BoundReport lemma1_bound(const Eigen::VectorXd& b, const Dataset& train, double population_risk);

/// lhs = R_{n_s}(b), rhs = Mbar + varsigma.
BoundReport theorem1_bound(const Eigen::VectorXd& b_train, const Dataset& train, const Dataset& test,
                           const BoundOptions& opts = {});

/// Prediction distance between the unpenalized and the validated Lasso fit on the test set.
BoundReport theorem2_bound(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                           const Dataset& test, const BoundOptions& opts = {});

/// Coefficient distance, n_t >= p, with rho the smallest eigenvalue of (1/n_s) X_s^T X_s.
BoundReport theorem3_bound(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                           const Dataset& test, const BoundOptions& opts = {});

/// As theorem3_bound with rho replaced by the restricted eigenvalue of the test design
/// at support size s (default |supp(b_train) u supp(b_lasso)|).
BoundReport theorem4_bound(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                           const Dataset& test, const BoundOptions& opts = {}, std::optional<Index> s = std::nullopt);

enum class CvBoundMode { Prediction, MinEigenvalue, RestrictedEigenvalue };

/// K-fold versions, built around the worst (k*, q*) fold pair. `d` is the standardized
/// sample the selection was run on; `fold_fits` are the per-fold extremum fits on d.
/// Prediction          -> Corollary2 (prediction distance averaged over folds)
/// MinEigenvalue       -> Corollary3 (squared coefficient distance, rho = min over folds)
/// RestrictedEigenvalue-> Corollary4 (same with restricted eigenvalues)
BoundReport cv_prediction_bound(const Dataset& d, const SelectionResult& selection,
                                std::span<const FitResult> fold_fits, CvBoundMode mode,
                                const BoundOptions& opts = {}, std::optional<Index> s = std::nullopt);

} // namespace cvlasso
