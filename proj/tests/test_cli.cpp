#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(CVLASSO_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("cvlasso_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("cli: usage errors exit 1")
{
    CHECK(run("") == 1);
    CHECK(run("table1 --p 20") == 1);  // missing --out
    CHECK(run("table1 --out /tmp/x --bogus 3") == 1);
    CHECK(run("nonsense --out /tmp/x") == 1);
    CHECK(run("coverage --out /tmp/x --moment-order 3") == 1);
    CHECK(run("--help") == 0);
}

TEST_CASE("cli: runtime errors exit 2")
{
    const auto dir = fresh_dir("rt");
    CHECK(run("coverage --bound THEOREM3 --n 50 --p 80 --reps 2 --out " + dir.string()) == 2);
    const auto bad = dir / "bad.csv";
    fs::create_directories(dir);
    {
        std::ofstream out(bad);
        out << "y,x1\n1,oops\n";
    }
    CHECK(run("fit --data " + bad.string() + " --out " + dir.string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli: table1 writes its files and is deterministic")
{
    const auto a = fresh_dir("t1a");
    const auto b = fresh_dir("t1b");
    const std::string flags = "table1 --n 60 --p 15,70 --reps 2 --seed 7 --k-folds 4 --grid-points 20 ";
    REQUIRE(run(flags + "--out " + a.string()) == 0);
    REQUIRE(run(flags + "--out " + b.string() + " --threads 2") == 0);
    for (const char* f : {"table1.json", "boxplots_p15.csv", "boxplots_p70.csv", "gr2_p15.csv", "gr2_p70.csv"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto j = nlohmann::json::parse(slurp(a / "table1.json"));
    REQUIRE(j["experiments"].size() == 2);
    CHECK(j["experiments"][0]["methods"].contains("LASSO"));
    CHECK(j["experiments"][0]["methods"].contains("OLS"));
    CHECK(j["experiments"][1]["methods"].contains("FSR"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("cli: simulate, fit, coverage")
{
    const auto dir = fresh_dir("misc");
    REQUIRE(run("simulate --n 50 --p 12 --seed 3 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "simulated.csv"));
    CHECK(fs::exists(dir / "beta_true.csv"));

    REQUIRE(run("fit --data " + (dir / "simulated.csv").string() + " --k-folds 5 --grid-points 30 --out " +
                dir.string()) == 0);
    const auto fit = nlohmann::json::parse(slurp(dir / "fit.json"));
    CHECK(fit["raw_coefficients"].size() == 12);
    CHECK(fit["cv_curve"].size() == 31);
    const auto curve = slurp(dir / "cv_curve.csv");
    CHECK(curve.rfind("lambda,mean_ge,ge_fold0,", 0) == 0);

    REQUIRE(run("coverage --bound THEOREM3 --n 100 --p 10 --reps 5 --varpi 0.8 --out " + dir.string()) == 0);
    const auto cov = nlohmann::json::parse(slurp(dir / "coverage_THEOREM3.json"));
    CHECK(cov["replications"] == 5);
    CHECK(cov["varpi"] == 0.8);
    fs::remove_all(dir);
}
