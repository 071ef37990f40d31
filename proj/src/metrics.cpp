#include "cvlasso/metrics.hpp"

namespace cvlasso {

double empirical_risk(const Eigen::VectorXd& b, const Dataset& d)
{
    return empirical_risk(b, d.X, d.y);
}

double r_squared(const Eigen::VectorXd& b, const Dataset& d)
{
    return r_squared(b, d.X, d.y);
}

double gr_squared(const Eigen::VectorXd& b, const Dataset& train, const Dataset& test)
{
    return r_squared(b, train) * r_squared(b, test);
}

double bias_l2(const Eigen::VectorXd& b, const Eigen::VectorXd& beta_true)
{
    if (b.size() != beta_true.size())
        throw Error(Errc::DimensionMismatch, "bias_l2: vectors differ in length");
    return (b - beta_true).norm();
}

FitMetrics evaluate_fit(const Eigen::VectorXd& b, const Dataset& train, const Dataset& test,
                        std::optional<Eigen::VectorXd> beta_true)
{
    FitMetrics m;
    m.training_error = empirical_risk(b, train);
    m.generalization_error = empirical_risk(b, test);
    m.r2_train = r_squared(b, train);
    m.r2_test = r_squared(b, test);
    m.gr2 = m.r2_train * m.r2_test;
    if (beta_true)
        m.bias_l2 = bias_l2(b, *beta_true);
    return m;
}

} // namespace cvlasso
