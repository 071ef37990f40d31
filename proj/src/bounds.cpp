#include "cvlasso/bounds.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cvlasso/metrics.hpp"

namespace cvlasso {

double vc_epsilon(const VCParams& params)
{
    if (params.h < 1)
        throw Error(Errc::InvalidArgument, "VC dimension must be >= 1");
    if (params.n_t < 1)
        throw Error(Errc::InvalidArgument, "training size must be >= 1");
    if (!(params.eta > 0.0 && params.eta < 1.0))
        throw Error(Errc::InvalidArgument, "eta must lie in (0, 1)");
    const double h = params.h;
    const double n = params.n_t;
    return (h * std::log(n / h) + h - std::log(params.eta)) / n;
}

double vc_bound(double training_error, double epsilon)
{
    if (epsilon < 0.0)
        throw Error(Errc::NonPositiveRatio, "epsilon = " + std::to_string(epsilon) + " is negative (h far above n_t)");
    if (!(epsilon < 1.0))
        throw Error(Errc::EpsilonTooLarge, "epsilon = " + std::to_string(epsilon) + " >= 1, bound is vacuous");
    return training_error / (1.0 - std::sqrt(epsilon));
}

double srm_rate(double n_t, double h, double tau, double r_n)
{
    if (!(n_t >= 2.0))
        throw Error(Errc::InvalidArgument, "srm_rate needs n_t >= 2");
    if (!(tau >= 0.0) || !(h >= 1.0))
        throw Error(Errc::InvalidArgument, "srm_rate needs tau >= 0 and h >= 1");
    return r_n + tau * std::sqrt(h * std::log(n_t) / n_t);
}

namespace {

void check_losses(std::span<const double> losses, double moment_order)
{
    if (losses.empty())
        throw Error(Errc::EmptyData, "loss sample is empty");
    if (!(moment_order > 1.0 && moment_order <= 2.0))
        throw Error(Errc::InvalidArgument, "moment order must lie in (1, 2]");
    for (double l : losses)
        if (!(l >= 0.0))
            throw Error(Errc::InvalidArgument, "losses must be nonnegative");
}

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

double plug_in_tau(std::span<const double> losses, double moment_order)
{
    check_losses(losses, moment_order);
    const double mean = mean_of(losses);
    if (!(mean > 0.0))
        throw Error(Errc::ZeroMeanLoss, "mean loss is zero, tail ratio undefined");
    double moment = 0.0;
    for (double l : losses)
        moment += std::pow(l, moment_order);
    moment /= static_cast<double>(losses.size());
    return std::pow(moment, 1.0 / moment_order) / mean;
}

double bahr_esseen_varsigma(std::span<const double> losses, double moment_order, double varpi)
{
    if (!(varpi > 0.0 && varpi < 1.0))
        throw Error(Errc::InvalidArgument, "varpi must lie in (0, 1)");
    const double tau = plug_in_tau(losses, moment_order);
    const double mean = mean_of(losses);
    const double q = moment_order;
    const double n_s = static_cast<double>(losses.size());
    return std::pow(2.0, 1.0 / q) * tau * mean / (std::pow(1.0 - varpi, 1.0 / q) * std::pow(n_s, 1.0 - 1.0 / q));
}

double min_eigenvalue(const Dataset& d)
{
    return min_eigenvalue(d.X);
}

double choose(Index n, Index k)
{
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (Index i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(c);
}

double restricted_eigenvalue_of_gram(const Eigen::MatrixXd& gram, Index s)
{
    const Index p = gram.rows();
    if (s < 1 || s > p)
        throw Error(Errc::InvalidArgument, "support size must lie in [1, p]");
    if (choose(p, s) > kSupportBudget)
        throw Error(Errc::TooLargeS, "C(" + std::to_string(p) + ", " + std::to_string(s) + ") supports exceed the " +
                                         "enumeration budget of 1e6");
    if (s == 1)
        return gram.diagonal().minCoeff();

    std::vector<Index> idx(static_cast<std::size_t>(s));
    std::iota(idx.begin(), idx.end(), Index{0});
    Eigen::MatrixXd sub(s, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        for (Index a = 0; a < s; ++a)
            for (Index b = 0; b < s; ++b)
                sub(a, b) = gram(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        eig.compute(sub, Eigen::EigenvaluesOnly);
        best = std::min(best, eig.eigenvalues()(0));

        // Next combination in lexicographic order.
        Index i = s - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == p - s + i)
            --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < s; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best < 0.0 && best >= -1e-10 ? 0.0 : best;
}

double restricted_eigenvalue(const Dataset& d, Index s)
{
    return restricted_eigenvalue(d.X, s);
}

const char* to_string(BoundName b) noexcept
{
    switch (b) {
    case BoundName::Lemma1: return "LEMMA1";
    case BoundName::Theorem1: return "THEOREM1";
    case BoundName::Theorem2: return "THEOREM2";
    case BoundName::Theorem3: return "THEOREM3";
    case BoundName::Theorem4: return "THEOREM4";
    case BoundName::Corollary2: return "COROLLARY2";
    case BoundName::Corollary3: return "COROLLARY3";
    case BoundName::Corollary4: return "COROLLARY4";
    }
    return "UNKNOWN";
}

BoundName bound_from_string(std::string_view s)
{
    for (auto b : {BoundName::Lemma1, BoundName::Theorem1, BoundName::Theorem2, BoundName::Theorem3,
                   BoundName::Theorem4, BoundName::Corollary2, BoundName::Corollary3, BoundName::Corollary4}) {
        if (s == to_string(b)) return b;
    }
    throw Error(Errc::InvalidArgument, "unknown bound name '" + std::string(s) + "'");
}

namespace {

void check_pair(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                const Dataset& test)
{
    if (train.p() != test.p() || b_train.size() != train.p() || b_lasso.size() != train.p())
        throw Error(Errc::DimensionMismatch, "bound inputs disagree on p");
}

Eigen::VectorXd squared(const Eigen::VectorXd& v)
{
    return v.array().square().matrix();
}

// Pieces shared by Theorems 2-4: everything is a function of b_train's residuals.
struct ValidationPieces {
    double epsilon = 0.0;
    double mbar = 0.0;          // (1/n_t)||e_t||^2 / (1 - sqrt(eps))
    double test_error = 0.0;    // (1/n_s)||e_s||^2
    double cross = 0.0;         // (4/n_s)||e_s^T X_s||_inf ||b_train||_1
    double varsigma = 0.0;
    double tau_hat = 0.0;
};

ValidationPieces validation_pieces(const Eigen::VectorXd& b_train, const Dataset& train, const Dataset& test,
                                   const BoundOptions& opts)
{
    ValidationPieces v;
    const double n_t = static_cast<double>(train.n());
    const double n_s = static_cast<double>(test.n());
    const Eigen::VectorXd e_t = train.y - train.X * b_train;
    const Eigen::VectorXd e_s = test.y - test.X * b_train;
    v.epsilon = vc_epsilon(vc_params(train.p(), train.n()));
    v.mbar = vc_bound(e_t.squaredNorm() / n_t, v.epsilon);
    v.test_error = e_s.squaredNorm() / n_s;
    v.cross = 4.0 / n_s * (test.X.transpose() * e_s).cwiseAbs().maxCoeff() * b_train.lpNorm<1>();
    const Eigen::VectorXd losses = squared(e_s);
    const std::span<const double> view(losses.data(), static_cast<std::size_t>(losses.size()));
    v.tau_hat = plug_in_tau(view, opts.moment_order);
    v.varsigma = bahr_esseen_varsigma(view, opts.moment_order, opts.varpi);
    return v;
}

BoundReport base_report(BoundName name, const Dataset& train, const Dataset& test, const BoundOptions& opts)
{
    BoundReport r;
    r.name = name;
    r.n_t = train.n();
    r.n_s = test.n();
    r.h = train.p();
    r.nominal_prob = opts.varpi * (1.0 - 1.0 / static_cast<double>(train.n()));
    return r;
}

void close_report(BoundReport& r)
{
    r.rhs = r.terms.sum();
    r.holds = r.lhs <= r.rhs + 1e-12;
}

BoundReport coefficient_bound(BoundName name, double rho, const Eigen::VectorXd& b_train,
                              const Eigen::VectorXd& b_lasso, const Dataset& train, const Dataset& test,
                              const BoundOptions& opts)
{
    const auto v = validation_pieces(b_train, train, test, opts);
    BoundReport r = base_report(name, train, test, opts);
    r.lhs = (b_train - b_lasso).norm();
    r.terms.epsilon = v.epsilon;
    r.terms.eigenvalue = rho;
    r.terms.overfit_gap = std::sqrt(std::abs((v.mbar - v.test_error) / rho));
    r.terms.cross_term = std::sqrt(v.cross / rho);
    r.terms.varsigma_term = std::sqrt(v.varsigma / rho);
    r.varsigma = v.varsigma;
    r.tau_hat = v.tau_hat;
    close_report(r);
    return r;
}

} // namespace

BoundReport lemma1_bound(const Eigen::VectorXd& b, const Dataset& train, double population_risk)
{
    if (b.size() != train.p())
        throw Error(Errc::DimensionMismatch, "coefficient length differs from p");
    BoundReport r;
    r.name = BoundName::Lemma1;
    r.n_t = train.n();
    r.h = train.p();
    const auto params = vc_params(train.p(), train.n());
    r.nominal_prob = 1.0 - params.eta;
    r.terms.epsilon = vc_epsilon(params);
    r.terms.overfit_gap = vc_bound(empirical_risk(b, train), r.terms.epsilon);
    r.lhs = population_risk;
    close_report(r);
    return r;
}

BoundReport theorem1_bound(const Eigen::VectorXd& b_train, const Dataset& train, const Dataset& test,
                           const BoundOptions& opts)
{
    check_pair(b_train, b_train, train, test);
    const auto v = validation_pieces(b_train, train, test, opts);
    BoundReport r = base_report(BoundName::Theorem1, train, test, opts);
    r.lhs = v.test_error;
    r.terms.epsilon = v.epsilon;
    r.terms.overfit_gap = v.mbar;
    r.terms.varsigma_term = v.varsigma;
    r.varsigma = v.varsigma;
    r.tau_hat = v.tau_hat;
    close_report(r);
    return r;
}

BoundReport theorem2_bound(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                           const Dataset& test, const BoundOptions& opts)
{
    check_pair(b_train, b_lasso, train, test);
    const auto v = validation_pieces(b_train, train, test, opts);
    BoundReport r = base_report(BoundName::Theorem2, train, test, opts);
    r.lhs = (test.X * (b_train - b_lasso)).squaredNorm() / static_cast<double>(test.n());
    r.terms.epsilon = v.epsilon;
    r.terms.overfit_gap = v.mbar - v.test_error;
    r.terms.cross_term = v.cross;
    r.terms.varsigma_term = v.varsigma;
    r.varsigma = v.varsigma;
    r.tau_hat = v.tau_hat;
    close_report(r);
    return r;
}

BoundReport theorem3_bound(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                           const Dataset& test, const BoundOptions& opts)
{
    check_pair(b_train, b_lasso, train, test);
    if (train.n() < train.p())
        throw Error(Errc::RankDeficient, "theorem 3 bound needs n_t >= p");
    const double rho = min_eigenvalue(test.X);
    if (!(rho > 0.0))
        throw Error(Errc::RankDeficient, "test design Gram matrix is singular");
    return coefficient_bound(BoundName::Theorem3, rho, b_train, b_lasso, train, test, opts);
}

BoundReport theorem4_bound(const Eigen::VectorXd& b_train, const Eigen::VectorXd& b_lasso, const Dataset& train,
                           const Dataset& test, const BoundOptions& opts, std::optional<Index> s)
{
    check_pair(b_train, b_lasso, train, test);
    Index size = 0;
    if (s) {
        size = *s;
    } else {
        for (Index j = 0; j < b_train.size(); ++j)
            if (b_train(j) != 0.0 || b_lasso(j) != 0.0) ++size;
        size = std::max<Index>(size, 1);
    }
    if (size > std::min(test.n(), test.p()))
        throw Error(Errc::ZeroRestrictedEigenvalue, "support size " + std::to_string(size) +
                                                        " exceeds min(n_s, p); restricted eigenvalue is zero");
    const double rho = restricted_eigenvalue(test.X, size);
    if (!(rho > 1e-12))
        throw Error(Errc::ZeroRestrictedEigenvalue, "restricted eigenvalue is zero");
    return coefficient_bound(BoundName::Theorem4, rho, b_train, b_lasso, train, test, opts);
}

BoundReport cv_prediction_bound(const Dataset& d, const SelectionResult& selection,
                                std::span<const FitResult> fold_fits, CvBoundMode mode, const BoundOptions& opts,
                                std::optional<Index> s)
{
    if (selection.method != SelectionMethod::KFold)
        throw Error(Errc::InvalidArgument, "cross-validated bound needs a K-fold selection");
    if (!d.standardized)
        throw Error(Errc::InvalidArgument, "cross-validated bound expects the standardized sample");
    const auto& plan = selection.plan;
    const auto wf = worst_fold(d, plan, fold_fits);
    const Eigen::VectorXd& b_bar = wf.b_train;
    const Eigen::VectorXd& b_lasso = selection.chosen.coefficients;
    if (b_lasso.size() != d.p())
        throw Error(Errc::DimensionMismatch, "selection and dataset disagree on p");

    const auto train_idx = plan.train_rows(wf.k);
    const Dataset train = d.rows(train_idx);
    const double n_t = static_cast<double>(train.n());
    const double epsilon = vc_epsilon(vc_params(d.p(), train.n()));
    const double mbar = vc_bound((train.y - train.X * b_bar).squaredNorm() / n_t, epsilon);

    const double K = static_cast<double>(plan.K);
    double mean_test_error = 0.0;
    double mean_cross = 0.0;
    double mean_pred_gap = 0.0;
    double rho = std::numeric_limits<double>::infinity();
    Eigen::VectorXd worst_losses;
    Index n_s_worst = 0;

    Index support = 0;
    if (mode == CvBoundMode::RestrictedEigenvalue) {
        if (s) {
            support = *s;
        } else {
            for (Index j = 0; j < d.p(); ++j)
                if (b_bar(j) != 0.0 || b_lasso(j) != 0.0) ++support;
            support = std::max<Index>(support, 1);
        }
    }

    for (int q = 0; q < plan.K; ++q) {
        const auto idx = plan.test_rows(q);
        const Dataset fold = d.rows(idx);
        const double n_s = static_cast<double>(fold.n());
        const Eigen::VectorXd e_s = fold.y - fold.X * b_bar;
        mean_test_error += e_s.squaredNorm() / n_s;
        mean_cross += 4.0 / n_s * (fold.X.transpose() * e_s).cwiseAbs().maxCoeff() * b_bar.lpNorm<1>();
        mean_pred_gap += (fold.X * (b_bar - b_lasso)).squaredNorm() / n_s;
        if (q == wf.q) {
            worst_losses = squared(e_s);
            n_s_worst = fold.n();
        }
        if (mode == CvBoundMode::MinEigenvalue) {
            rho = std::min(rho, min_eigenvalue(fold.X));
        } else if (mode == CvBoundMode::RestrictedEigenvalue) {
            if (support > std::min(fold.n(), fold.p()))
                throw Error(Errc::ZeroRestrictedEigenvalue, "support size exceeds a test fold's rank");
            rho = std::min(rho, restricted_eigenvalue(fold.X, support));
        }
    }
    mean_test_error /= K;
    mean_cross /= K;
    mean_pred_gap /= K;

    const std::span<const double> view(worst_losses.data(), static_cast<std::size_t>(worst_losses.size()));
    const double varsigma = bahr_esseen_varsigma(view, opts.moment_order, opts.varpi);

    BoundReport r;
    r.n_t = train.n();
    r.n_s = n_s_worst;
    r.h = d.p();
    r.nominal_prob = opts.varpi * (1.0 - 1.0 / n_t);
    r.varsigma = varsigma;
    r.tau_hat = plug_in_tau(view, opts.moment_order);
    r.terms.epsilon = epsilon;

    const double gap = std::abs(mbar - mean_test_error);
    if (mode == CvBoundMode::Prediction) {
        r.name = BoundName::Corollary2;
        r.lhs = mean_pred_gap;
        r.terms.overfit_gap = gap;
        r.terms.cross_term = mean_cross;
        r.terms.varsigma_term = varsigma;
    } else {
        r.name = mode == CvBoundMode::MinEigenvalue ? BoundName::Corollary3 : BoundName::Corollary4;
        if (!(rho > 1e-12))
            throw Error(mode == CvBoundMode::MinEigenvalue ? Errc::RankDeficient : Errc::ZeroRestrictedEigenvalue,
                        "a test fold's Gram matrix has no positive (restricted) eigenvalue");
        r.lhs = (b_bar - b_lasso).squaredNorm();
        r.terms.eigenvalue = rho;
        r.terms.overfit_gap = gap / rho;
        r.terms.cross_term = mean_cross / rho;
        r.terms.varsigma_term = varsigma / rho;
    }
    close_report(r);
    return r;
}

} // namespace cvlasso
