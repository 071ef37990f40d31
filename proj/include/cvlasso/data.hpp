#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvlasso/grid.hpp"

namespace cvlasso {

using Index = Eigen::Index;

/// Column moments used to map raw values onto the standardized scale:
/// x' = (x - mean) / scale, with scale = sqrt((1/n) sum (x - mean)^2).
struct StandardizationParams {
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_scales;
    double y_mean = 0.0;
    double y_scale = 1.0;

    static StandardizationParams identity(Index p);
};

/// Response plus design matrix.
///
/// `standardized` is set only when every column (and y) was centered and
/// scaled with its own moments. The metadata fields always describe the map
/// from the original raw units to the stored values, so a dataset that was
/// transformed with someone else's moments carries those moments but keeps
/// standardized == false.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    bool standardized = false;
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_scales;
    double y_mean = 0.0;
    double y_scale = 1.0;

    /// Raw dataset with identity metadata. Throws EmptyData / DimensionMismatch.
    static Dataset from(Eigen::MatrixXd X, Eigen::VectorXd y);

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }

    /// Copy of the listed rows; metadata and flag are carried over unchanged.
    Dataset rows(std::span<const Index> idx) const;
};

/// Standardize with the dataset's own moments.
/// Throws EmptyData, or ConstantColumnError (column -1 means y).
std::pair<Dataset, StandardizationParams> standardize(const Dataset& d);

/// Transform with externally supplied (training) moments. Result is not flagged standardized.
Dataset apply_standardization(const Dataset& d, const StandardizationParams& params);

/// Coefficients on the standardized scale mapped back to raw units:
/// b_raw_j = b_j * y_scale / col_scale_j.
Eigen::VectorXd to_raw_coefficients(const Eigen::VectorXd& b, const Dataset& standardized);

/// Train size floor(train_fraction * n), remainder to test. Rows are
/// assigned by a seeded shuffle and kept in ascending order within each part.
std::pair<Dataset, Dataset> split_validation(const Dataset& d, double train_fraction, std::uint64_t seed);

struct FoldPlan {
    int K = 0;
    std::vector<int> assignment;

    Index n() const { return static_cast<Index>(assignment.size()); }
    std::vector<Index> test_rows(int fold) const;
    std::vector<Index> train_rows(int fold) const;
    std::vector<Index> fold_sizes() const;
};

/// Balanced K-fold partition: a seeded permutation of 0..n-1 dealt round-robin,
/// so fold sizes differ by at most one. Throws BadK unless 2 <= K <= n.
FoldPlan kfold_plan(Index n, int K, std::uint64_t seed);

struct SimulationConfig {
    Index n = 250;
    Index p = 200;
    std::vector<double> beta1{2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
    double corr = 0.9;
    double noise_sd = 1.0;
    int replications = 50;
    std::uint64_t seed = 1;
    int K = 10;
    GridSpec lambda_grid{};

    /// Throws InvalidArgument on a bad configuration.
    void validate() const;
    Eigen::VectorXd beta() const;
};

/// Independent random streams drawn from one master seed.
enum class Stream : std::uint64_t { Train = 0, Test = 1, Folds = 2, Split = 3, Perturb = 4 };

/// Seed for (master, replication, purpose): splitmix64(master) xor replication,
/// then mixed once more with the purpose tag. Replications never share a stream,
/// and reps can be run in any order or subset.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication, Stream purpose);

struct SimulatedDraw {
    Dataset data;
    Eigen::VectorXd beta;
};

/// One draw of the equicorrelated Gaussian design:
/// x_ij = sqrt(corr) z_i0 + sqrt(1 - corr) z_ij, y = X beta + u, u ~ N(0, noise_sd^2).
/// Random numbers come from std::mt19937_64 seeded by stream_seed(cfg.seed, rep, purpose),
/// with std::normal_distribution for the Gaussian draws.
SimulatedDraw simulate_dgp(const SimulationConfig& cfg, std::uint64_t replication_index,
                           Stream purpose = Stream::Train, Index rows = -1);

/// CSV with header `y,x1,...,xp`; first column is the response.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& d, const std::filesystem::path& path);

} // namespace cvlasso
