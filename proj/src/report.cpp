#include "cvlasso/report.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include "cvlasso/error.hpp"

namespace cvlasso {

using nlohmann::ordered_json;

namespace {

ordered_json vector_json(const Eigen::VectorXd& v)
{
    ordered_json a = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path)
{
    out.close();
    if (!out)
        throw Error(Errc::IoError, "write failed for " + path.string());
}

} // namespace

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

ordered_json to_json(const SimulationConfig& cfg)
{
    ordered_json grid;
    grid["mode"] = cfg.lambda_grid.mode == GridMode::Geometric ? "geometric" : "linear";
    grid["num_points"] = cfg.lambda_grid.num_points;
    grid["min_ratio"] = cfg.lambda_grid.min_ratio;
    grid["step"] = cfg.lambda_grid.step;
    grid["include_zero"] = cfg.lambda_grid.include_zero;

    ordered_json j;
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["beta1"] = cfg.beta1;
    j["corr"] = cfg.corr;
    j["noise_sd"] = cfg.noise_sd;
    j["replications"] = cfg.replications;
    j["seed"] = cfg.seed;
    j["K"] = cfg.K;
    j["lambda_grid"] = grid;
    return j;
}

ordered_json to_json(const MethodMetrics& m)
{
    ordered_json j;
    j["bias"] = m.bias;
    j["training_error"] = m.training_error;
    j["generalization_error"] = m.generalization_error;
    j["r2_in"] = m.r2_in;
    j["r2_out"] = m.r2_out;
    j["gr2"] = m.gr2;
    return j;
}

ordered_json to_json(const FitResult& fit)
{
    ordered_json j;
    j["method"] = to_string(fit.method);
    j["lambda"] = fit.lambda;
    j["support"] = fit.support;
    j["training_error"] = fit.training_error;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["coefficients"] = vector_json(fit.coefficients);
    return j;
}

ordered_json to_json(const BoundReport& r)
{
    ordered_json terms;
    terms["overfit_gap"] = r.terms.overfit_gap;
    terms["cross_term"] = r.terms.cross_term;
    terms["varsigma_term"] = r.terms.varsigma_term;
    terms["eigenvalue"] = r.terms.eigenvalue;
    terms["epsilon"] = r.terms.epsilon;

    ordered_json j;
    j["name"] = to_string(r.name);
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["terms"] = terms;
    j["nominal_prob"] = r.nominal_prob;
    j["holds"] = r.holds;
    j["varsigma"] = r.varsigma;
    j["tau_hat"] = r.tau_hat;
    j["n_t"] = r.n_t;
    j["n_s"] = r.n_s;
    j["h"] = r.h;
    return j;
}

ordered_json to_json(const SelectionResult& s)
{
    ordered_json curve = ordered_json::array();
    for (const auto& pt : s.cv_curve)
        curve.push_back({{"lambda", pt.lambda}, {"mean_ge", pt.mean_ge}, {"fold_ge", pt.fold_ge}});

    ordered_json j;
    j["method"] = to_string(s.method);
    j["K"] = s.plan.K;
    j["lambda_star"] = s.lambda_star;
    j["chosen"] = to_json(s.chosen);
    j["cv_curve"] = curve;
    j["fold_assignment"] = s.plan.assignment;
    ordered_json params;
    params["col_means"] = vector_json(s.params.col_means);
    params["col_scales"] = vector_json(s.params.col_scales);
    params["y_mean"] = s.params.y_mean;
    params["y_scale"] = s.params.y_scale;
    j["standardization"] = params;
    return j;
}

ordered_json to_json(const ExperimentReport& r)
{
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) {
        ordered_json jr;
        jr["replication"] = row.replication;
        jr["lambda_star"] = row.lambda_star;
        jr["lasso_support_size"] = row.lasso_support_size;
        jr["exact_support"] = row.exact_support;
        jr["comparator_support_size"] = row.comparator_support_size;
        jr["LASSO"] = to_json(row.lasso);
        jr[to_string(r.comparator)] = to_json(row.comparator);
        jr["worst_zero"] = row.worst_zero;
        jr["lasso_tracked"] = row.lasso_tracked;
        jr["comparator_tracked"] = row.comparator_tracked;
        rows.push_back(jr);
    }

    ordered_json j;
    j["config"] = to_json(r.config);
    j["test_size"] = r.test_size;
    j["comparator"] = to_string(r.comparator);
    ordered_json methods;
    methods["LASSO"] = to_json(r.lasso_mean);
    methods[to_string(r.comparator)] = to_json(r.comparator_mean);
    j["methods"] = methods;
    j["support_recovery_rate"] = r.support_recovery_rate;
    j["rows"] = rows;
    return j;
}

ordered_json to_json(std::span<const ExperimentReport> reports)
{
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports)
        arr.push_back(to_json(r));
    return {{"experiments", arr}};
}

ordered_json to_json(const CoverageReport& r)
{
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) {
        ordered_json jr;
        jr["replication"] = row.replication;
        jr["computed"] = row.computed;
        if (row.computed)
            jr["report"] = to_json(row.report);
        else
            jr["error"] = row.error;
        rows.push_back(jr);
    }
    ordered_json j;
    j["bound"] = to_string(r.bound);
    j["config"] = to_json(r.config);
    j["varpi"] = r.varpi;
    j["moment_order"] = r.moment_order;
    j["nominal_prob"] = r.nominal_prob;
    j["replications"] = r.rows.size();
    j["computed"] = r.computed;
    j["holds"] = r.holds;
    j["holds_fraction"] = r.holds_fraction;
    j["failures"] = r.failures;
    j["rows"] = rows;
    return j;
}

void save_json(const ordered_json& j, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    close_out(out, path);
}

void save_boxplot_csv(const ExperimentReport& report, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "replication";
    for (const char* m : {"lasso", "comparator"})
        for (int c = 1; c <= kTrackedCoefficients; ++c)
            out << ',' << m << "_b" << c;
    out << '\n';
    for (const auto& row : report.rows) {
        out << row.replication;
        for (double v : row.lasso_tracked)
            out << ',' << format_double(v);
        for (double v : row.comparator_tracked)
            out << ',' << format_double(v);
        out << '\n';
    }
    close_out(out, path);
}

void save_gr2_csv(const ExperimentReport& report, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "replication,lasso_gr2,comparator_gr2\n";
    for (const auto& row : report.rows)
        out << row.replication << ',' << format_double(row.lasso.gr2) << ',' << format_double(row.comparator.gr2)
            << '\n';
    close_out(out, path);
}

void save_cv_curve_csv(const SelectionResult& selection, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "lambda,mean_ge";
    const std::size_t folds = selection.cv_curve.empty() ? 0 : selection.cv_curve.front().fold_ge.size();
    for (std::size_t q = 0; q < folds; ++q)
        out << ",ge_fold" << q;
    out << '\n';
    for (const auto& pt : selection.cv_curve) {
        out << format_double(pt.lambda) << ',' << format_double(pt.mean_ge);
        for (double g : pt.fold_ge)
            out << ',' << format_double(g);
        out << '\n';
    }
    close_out(out, path);
}

void save_vector_csv(const Eigen::VectorXd& v, const std::string& header, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << header << '\n';
    for (Index i = 0; i < v.size(); ++i)
        out << format_double(v(i)) << '\n';
    close_out(out, path);
}

} // namespace cvlasso
