#pragma once

#include <optional>

#include <Eigen/Dense>

#include "cvlasso/data.hpp"
#include "cvlasso/error.hpp"

namespace cvlasso {

/// (1/n) ||y - Xb||^2.
template <typename DX, typename DY, typename DB>
typename DX::Scalar empirical_risk(const Eigen::MatrixBase<DB>& b, const Eigen::MatrixBase<DX>& X,
                                   const Eigen::MatrixBase<DY>& y)
{
    if (X.cols() != b.size() || X.rows() != y.size())
        throw Error(Errc::DimensionMismatch, "empirical_risk: shapes of b, X, y disagree");
    return (y - X * b).squaredNorm() / static_cast<typename DX::Scalar>(X.rows());
}

/// 1 - risk / TSS with TSS = (1/n) sum (y - mean(y))^2 of the evaluated set.
template <typename DX, typename DY, typename DB>
typename DX::Scalar r_squared(const Eigen::MatrixBase<DB>& b, const Eigen::MatrixBase<DX>& X,
                              const Eigen::MatrixBase<DY>& y)
{
    using Scalar = typename DX::Scalar;
    const Scalar tss = (y.array() - y.mean()).square().mean();
    if (!(tss > Scalar(0)))
        throw Error(Errc::ZeroTSS, "r_squared: response has zero total sum of squares");
    return Scalar(1) - empirical_risk(b, X, y) / tss;
}

double empirical_risk(const Eigen::VectorXd& b, const Dataset& d);
double r_squared(const Eigen::VectorXd& b, const Dataset& d);

/// R^2 on the training set times R^2 on the test set.
double gr_squared(const Eigen::VectorXd& b, const Dataset& train, const Dataset& test);

/// ||b - beta||_2.
double bias_l2(const Eigen::VectorXd& b, const Eigen::VectorXd& beta_true);

struct FitMetrics {
    double training_error = 0.0;
    double generalization_error = 0.0;
    double r2_train = 0.0;
    double r2_test = 0.0;
    double gr2 = 0.0;
    std::optional<double> bias_l2;
};

FitMetrics evaluate_fit(const Eigen::VectorXd& b, const Dataset& train, const Dataset& test,
                        std::optional<Eigen::VectorXd> beta_true = std::nullopt);

} // namespace cvlasso
