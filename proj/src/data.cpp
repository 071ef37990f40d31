#include "cvlasso/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "cvlasso/error.hpp"

namespace cvlasso {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::EmptyData: return "EmptyData";
    case Errc::ConstantColumn: return "ConstantColumn";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::BadK: return "BadK";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::ZeroTSS: return "ZeroTSS";
    case Errc::EpsilonTooLarge: return "EpsilonTooLarge";
    case Errc::NonPositiveRatio: return "NonPositiveRatio";
    case Errc::ZeroMeanLoss: return "ZeroMeanLoss";
    case Errc::TooLargeS: return "TooLargeS";
    case Errc::ZeroRestrictedEigenvalue: return "ZeroRestrictedEigenvalue";
    case Errc::RegimeMismatch: return "RegimeMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

StandardizationParams StandardizationParams::identity(Index p)
{
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p), 0.0, 1.0};
}

Dataset Dataset::from(Eigen::MatrixXd X, Eigen::VectorXd y)
{
    if (X.rows() == 0 || X.cols() == 0 || y.size() == 0)
        throw Error(Errc::EmptyData, "dataset needs n >= 1 and p >= 1");
    if (X.rows() != y.size())
        throw Error(Errc::DimensionMismatch, "y has " + std::to_string(y.size()) + " rows, X has " +
                                                 std::to_string(X.rows()));
    Dataset d;
    const Index p = X.cols();
    d.X = std::move(X);
    d.y = std::move(y);
    d.col_means = Eigen::VectorXd::Zero(p);
    d.col_scales = Eigen::VectorXd::Ones(p);
    return d;
}

Dataset Dataset::rows(std::span<const Index> idx) const
{
    Dataset out;
    out.X.resize(static_cast<Index>(idx.size()), p());
    out.y.resize(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.X.row(static_cast<Index>(i)) = X.row(idx[i]);
        out.y(static_cast<Index>(i)) = y(idx[i]);
    }
    out.standardized = standardized;
    out.col_means = col_means;
    out.col_scales = col_scales;
    out.y_mean = y_mean;
    out.y_scale = y_scale;
    return out;
}

namespace {

double population_scale(const Eigen::Ref<const Eigen::VectorXd>& v, double mean)
{
    return std::sqrt((v.array() - mean).square().mean());
}

// Relative to the column's magnitude, so large constant values still count as constant.
bool is_constant(double scale, double mean)
{
    const double magnitude = std::max(1.0, std::abs(mean));
    return !(scale > 1e-12 * magnitude);
}

} // namespace

std::pair<Dataset, StandardizationParams> standardize(const Dataset& d)
{
    if (d.n() == 0 || d.p() == 0)
        throw Error(Errc::EmptyData, "cannot standardize an empty dataset");

    StandardizationParams params;
    params.col_means = d.X.colwise().mean().transpose();
    params.col_scales.resize(d.p());
    for (Index j = 0; j < d.p(); ++j) {
        const double s = population_scale(d.X.col(j), params.col_means(j));
        if (is_constant(s, params.col_means(j)))
            throw ConstantColumnError(static_cast<long>(j));
        params.col_scales(j) = s;
    }
    params.y_mean = d.y.mean();
    params.y_scale = population_scale(d.y, params.y_mean);
    if (is_constant(params.y_scale, params.y_mean))
        throw ConstantColumnError(-1);

    Dataset out = apply_standardization(d, params);
    out.standardized = true;
    return {std::move(out), std::move(params)};
}

Dataset apply_standardization(const Dataset& d, const StandardizationParams& params)
{
    if (params.col_means.size() != d.p() || params.col_scales.size() != d.p())
        throw Error(Errc::DimensionMismatch, "standardization params cover " +
                                                 std::to_string(params.col_means.size()) +
                                                 " columns, dataset has " + std::to_string(d.p()));
    Dataset out;
    out.X = (d.X.rowwise() - params.col_means.transpose()).array().rowwise() /
            params.col_scales.transpose().array();
    out.y = (d.y.array() - params.y_mean) / params.y_scale;
    out.standardized = false;

    // Compose with whatever map d already carried, so metadata stays relative to raw units.
    out.col_means = d.col_means.array() + d.col_scales.array() * params.col_means.array();
    out.col_scales = d.col_scales.array() * params.col_scales.array();
    out.y_mean = d.y_mean + d.y_scale * params.y_mean;
    out.y_scale = d.y_scale * params.y_scale;
    return out;
}

Eigen::VectorXd to_raw_coefficients(const Eigen::VectorXd& b, const Dataset& standardized)
{
    if (b.size() != standardized.p())
        throw Error(Errc::DimensionMismatch, "coefficient length differs from p");
    return (b.array() * standardized.y_scale / standardized.col_scales.array()).matrix();
}

namespace {

std::vector<Index> seeded_permutation(Index n, std::uint64_t seed)
{
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

} // namespace

std::pair<Dataset, Dataset> split_validation(const Dataset& d, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(Errc::InvalidArgument, "train_fraction must lie in (0, 1)");
    const Index n = d.n();
    const auto n_train = static_cast<Index>(std::floor(train_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n)
        throw Error(Errc::DegenerateSplit, "split of n=" + std::to_string(n) + " leaves an empty part");

    auto perm = seeded_permutation(n, seed);
    std::vector<Index> train(perm.begin(), perm.begin() + n_train);
    std::vector<Index> test(perm.begin() + n_train, perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {d.rows(train), d.rows(test)};
}

std::vector<Index> FoldPlan::test_rows(int fold) const
{
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == fold)
            out.push_back(static_cast<Index>(i));
    return out;
}

std::vector<Index> FoldPlan::train_rows(int fold) const
{
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != fold)
            out.push_back(static_cast<Index>(i));
    return out;
}

std::vector<Index> FoldPlan::fold_sizes() const
{
    std::vector<Index> sizes(static_cast<std::size_t>(K), 0);
    for (int a : assignment)
        ++sizes[static_cast<std::size_t>(a)];
    return sizes;
}

FoldPlan kfold_plan(Index n, int K, std::uint64_t seed)
{
    if (K < 2 || static_cast<Index>(K) > n)
        throw Error(Errc::BadK, "need 2 <= K <= n, got K=" + std::to_string(K) + ", n=" + std::to_string(n));
    FoldPlan plan;
    plan.K = K;
    plan.assignment.assign(static_cast<std::size_t>(n), 0);
    const auto perm = seeded_permutation(n, seed);
    for (Index i = 0; i < n; ++i)
        plan.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = static_cast<int>(i % K);
    return plan;
}

void SimulationConfig::validate() const
{
    if (n < 1 || p < 1)
        throw Error(Errc::InvalidArgument, "n and p must be positive");
    if (p < static_cast<Index>(beta1.size()))
        throw Error(Errc::InvalidArgument, "p must be at least the number of nonzero coefficients");
    if (!(corr >= 0.0 && corr < 1.0))
        throw Error(Errc::InvalidArgument, "corr must lie in [0, 1)");
    if (!(noise_sd >= 0.0))
        throw Error(Errc::InvalidArgument, "noise_sd must be nonnegative");
    if (replications < 1)
        throw Error(Errc::InvalidArgument, "replications must be >= 1");
}

Eigen::VectorXd SimulationConfig::beta() const
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (std::size_t j = 0; j < beta1.size(); ++j)
        b(static_cast<Index>(j)) = beta1[j];
    return b;
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication, Stream purpose)
{
    const std::uint64_t rep_seed = splitmix64(master) ^ replication;
    return splitmix64(rep_seed ^ splitmix64(static_cast<std::uint64_t>(purpose) + 0x5151ULL));
}

SimulatedDraw simulate_dgp(const SimulationConfig& cfg, std::uint64_t replication_index, Stream purpose,
                           Index rows)
{
    cfg.validate();
    const Index n = rows < 0 ? cfg.n : rows;
    if (n < 1)
        throw Error(Errc::InvalidArgument, "row count must be positive");
    const Index p = cfg.p;

    std::mt19937_64 rng(stream_seed(cfg.seed, replication_index, purpose));
    std::normal_distribution<double> normal(0.0, 1.0);

    const double common = std::sqrt(cfg.corr);
    const double own = std::sqrt(1.0 - cfg.corr);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd u(n);
    // Row-major draw order keeps row i identical regardless of how many rows follow.
    for (Index i = 0; i < n; ++i) {
        const double z0 = normal(rng);
        for (Index j = 0; j < p; ++j)
            X(i, j) = common * z0 + own * normal(rng);
        u(i) = cfg.noise_sd * normal(rng);
    }
    Eigen::VectorXd beta = cfg.beta();
    Eigen::VectorXd y = X * beta + u;
    return {Dataset::from(std::move(X), std::move(y)), std::move(beta)};
}

namespace {

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    // Header: only its width matters.
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            width = split_fields(trim(line)).size();
            break;
        }
    }
    if (width < 2)
        throw Error(Errc::EmptyData, path.string() + " needs a header with y and at least one covariate");

    std::vector<double> values;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty())
            continue;
        const auto fields = split_fields(body);
        if (fields.size() != width)
            throw Error(Errc::DimensionMismatch, "line " + std::to_string(line_no) + " has " +
                                                     std::to_string(fields.size()) + " fields, expected " +
                                                     std::to_string(width));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto cell = trim(fields[c]);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
                throw ParseError(line_no, c + 1, "not a number: '" + std::string(cell) + "'");
            values.push_back(v);
        }
        ++n;
    }
    if (n == 0)
        throw Error(Errc::EmptyData, path.string() + " has no data rows");

    const auto rows = static_cast<Index>(n);
    const auto p = static_cast<Index>(width - 1);
    Eigen::MatrixXd X(rows, p);
    Eigen::VectorXd y(rows);
    for (Index i = 0; i < rows; ++i) {
        const auto base = static_cast<std::size_t>(i) * width;
        y(i) = values[base];
        for (Index j = 0; j < p; ++j)
            X(i, j) = values[base + 1 + static_cast<std::size_t>(j)];
    }
    return Dataset::from(std::move(X), std::move(y));
}

void save_csv(const Dataset& d, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path.string());
    out << 'y';
    for (Index j = 0; j < d.p(); ++j)
        out << ",x" << (j + 1);
    out << '\n';
    for (Index i = 0; i < d.n(); ++i) {
        out << format_double(d.y(i));
        for (Index j = 0; j < d.p(); ++j)
            out << ',' << format_double(d.X(i, j));
        out << '\n';
    }
    if (!out)
        throw Error(Errc::IoError, "write failed for " + path.string());
}

} // namespace cvlasso
