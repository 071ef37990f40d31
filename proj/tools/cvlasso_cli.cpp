#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvlasso/data.hpp"
#include "cvlasso/error.hpp"
#include "cvlasso/experiments.hpp"
#include "cvlasso/report.hpp"
#include "cvlasso/selection.hpp"

namespace fs = std::filesystem;
using namespace cvlasso;

namespace {

struct Flags {
    Index n = 250;
    std::vector<Index> p{200, 250, 300, 500};
    int reps = 50;
    std::uint64_t seed = 1;
    int k_folds = 10;
    int grid_points = 100;
    double grid_min_ratio = 1e-3;
    std::string grid_mode = "geometric";
    double grid_step = 0.0;
    double corr = 0.9;
    double noise_sd = 1.0;
    std::string out;
    double varpi = 0.9;
    double moment_order = 2.0;
    std::string bound = "THEOREM3";
    std::string data;
    unsigned threads = 0;
    int first_rep = 0;
};

void add_common(CLI::App* cmd, Flags& f, bool p_list)
{
    cmd->add_option("--n", f.n, "sample size")->check(CLI::PositiveNumber);
    if (p_list)
        cmd->add_option("--p", f.p, "covariate counts (comma separated)")->delimiter(',')->check(CLI::PositiveNumber);
    else
        cmd->add_option("--p", f.p, "covariate count")->expected(1)->check(CLI::PositiveNumber);
    cmd->add_option("--reps", f.reps, "replications")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--k-folds", f.k_folds, "folds for cross-validation")->check(CLI::Range(2, 1 << 30));
    cmd->add_option("--grid-points", f.grid_points, "lambda grid size")->check(CLI::PositiveNumber);
    cmd->add_option("--grid-min-ratio", f.grid_min_ratio, "smallest lambda / lambda_max")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--grid-mode", f.grid_mode, "geometric or linear")
        ->check(CLI::IsMember({"geometric", "linear"}));
    cmd->add_option("--grid-step", f.grid_step, "step for the linear grid (0: lambda_max / points)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--corr", f.corr, "pairwise covariate correlation")->check(CLI::Range(0.0, 0.999999999));
    cmd->add_option("--noise-sd", f.noise_sd, "noise standard deviation")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory")->required();
    cmd->add_option("--threads", f.threads, "worker threads (0: hardware concurrency)");
}

SimulationConfig config_from(const Flags& f, Index p)
{
    SimulationConfig cfg;
    cfg.n = f.n;
    cfg.p = p;
    cfg.corr = f.corr;
    cfg.noise_sd = f.noise_sd;
    cfg.replications = f.reps;
    cfg.seed = f.seed;
    cfg.K = f.k_folds;
    cfg.lambda_grid.mode = f.grid_mode == "linear" ? GridMode::Linear : GridMode::Geometric;
    cfg.lambda_grid.num_points = f.grid_points;
    cfg.lambda_grid.min_ratio = f.grid_min_ratio;
    cfg.lambda_grid.step = f.grid_step;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const Flags& f)
{
    fs::path dir(f.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

ExperimentOptions experiment_options(const Flags& f)
{
    ExperimentOptions opts;
    opts.threads = f.threads;
    opts.first_replication = f.first_rep;
    return opts;
}

void cmd_table1(const Flags& f)
{
    const auto dir = out_dir(f);
    std::vector<ExperimentReport> reports;
    for (Index p : f.p) {
        auto report = run_experiment(config_from(f, p), experiment_options(f));
        save_boxplot_csv(report, dir / ("boxplots_p" + std::to_string(p) + ".csv"));
        save_gr2_csv(report, dir / ("gr2_p" + std::to_string(p) + ".csv"));
        reports.push_back(std::move(report));
    }
    save_json(to_json(std::span<const ExperimentReport>(reports)), dir / "table1.json");
}

void cmd_boxplots(const Flags& f)
{
    const auto dir = out_dir(f);
    for (Index p : f.p) {
        const auto report = run_boxplot_data(config_from(f, p), experiment_options(f));
        save_boxplot_csv(report, dir / ("boxplots_p" + std::to_string(p) + ".csv"));
        save_gr2_csv(report, dir / ("gr2_p" + std::to_string(p) + ".csv"));
    }
}

void cmd_coverage(const Flags& f)
{
    const auto dir = out_dir(f);
    const BoundName bound = bound_from_string(f.bound);
    CoverageOptions opts;
    opts.bound.varpi = f.varpi;
    opts.bound.moment_order = f.moment_order;
    opts.threads = f.threads;
    const auto cfg = config_from(f, f.p.front());
    const auto report = run_bound_coverage(cfg, bound, f.reps, opts);
    save_json(to_json(report), dir / ("coverage_" + std::string(to_string(bound)) + ".json"));
    std::cout << to_string(bound) << ": holds in " << report.holds << "/" << f.reps
              << " (nominal " << report.nominal_prob << ")\n";
}

void cmd_fit(const Flags& f)
{
    const auto dir = out_dir(f);
    const Dataset d = load_csv(f.data);
    GridSpec grid;
    grid.mode = f.grid_mode == "linear" ? GridMode::Linear : GridMode::Geometric;
    grid.num_points = f.grid_points;
    grid.min_ratio = f.grid_min_ratio;
    grid.step = f.grid_step;
    const auto selection = cv_lasso(d, f.k_folds, grid, f.seed);
    auto j = to_json(selection);
    j["raw_coefficients"] = std::vector<double>();
    const Dataset standardized = apply_standardization(d, selection.params);
    const Eigen::VectorXd raw = to_raw_coefficients(selection.chosen.coefficients, standardized);
    for (Index i = 0; i < raw.size(); ++i)
        j["raw_coefficients"].push_back(raw(i));
    save_json(j, dir / "fit.json");
    save_cv_curve_csv(selection, dir / "cv_curve.csv");
}

void cmd_simulate(const Flags& f)
{
    const auto dir = out_dir(f);
    const auto cfg = config_from(f, f.p.front());
    const auto draw = simulate_dgp(cfg, static_cast<std::uint64_t>(f.first_rep));
    save_csv(draw.data, dir / "simulated.csv");
    save_vector_csv(draw.beta, "beta", dir / "beta_true.csv");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cross-validated Lasso experiments"};
    app.require_subcommand(1);

    Flags table1, boxplots, coverage, fit, simulate;
    coverage.p = {50};
    coverage.reps = 200;
    fit.p = {1};
    simulate.p = {200};

    auto* c_table1 = app.add_subcommand("table1", "simulation table: CV-Lasso vs OLS/FSR for each p");
    add_common(c_table1, table1, true);
    c_table1->add_option("--first-rep", table1.first_rep, "index of the first replication")
        ->check(CLI::NonNegativeNumber);

    auto* c_box = app.add_subcommand("boxplots", "per-coefficient estimates and GR^2 for each p");
    add_common(c_box, boxplots, true);
    c_box->add_option("--first-rep", boxplots.first_rep, "index of the first replication")
        ->check(CLI::NonNegativeNumber);

    auto* c_cov = app.add_subcommand("coverage", "empirical coverage of one bound");
    add_common(c_cov, coverage, false);
    c_cov->add_option("--bound", coverage.bound, "LEMMA1, THEOREM1..4, COROLLARY2..4");
    c_cov->add_option("--varpi", coverage.varpi, "probability level of the varsigma term")
        ->check(CLI::Range(0.0, 1.0));
    c_cov->add_option("--moment-order", coverage.moment_order, "Bahr-Esseen moment order in (1, 2]")
        ->check(CLI::Range(1.0, 2.0));

    auto* c_fit = app.add_subcommand("fit", "CV-Lasso on a CSV file (y first, then covariates)");
    add_common(c_fit, fit, false);
    c_fit->add_option("--data", fit.data, "input CSV")->required()->check(CLI::ExistingFile);

    auto* c_sim = app.add_subcommand("simulate", "write one simulated draw to CSV");
    add_common(c_sim, simulate, false);
    c_sim->add_option("--rep", simulate.first_rep, "replication index")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (c_table1->parsed()) cmd_table1(table1);
        else if (c_box->parsed()) cmd_boxplots(boxplots);
        else if (c_cov->parsed()) cmd_coverage(coverage);
        else if (c_fit->parsed()) cmd_fit(fit);
        else if (c_sim->parsed()) cmd_simulate(simulate);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == Errc::InvalidArgument ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
