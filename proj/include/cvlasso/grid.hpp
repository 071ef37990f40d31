#pragma once

#include <vector>

namespace cvlasso {

enum class GridMode { Geometric, Linear };

/// Penalty grid descending from lambda_max.
///
/// Geometric: lambda_k = lambda_max * min_ratio^(k / (num_points - 1)).
/// Linear:    lambda_k = lambda_max - k * step, truncated before it reaches zero.
/// include_zero appends lambda = 0; callers drop it when the training part has n_t <= p.
struct GridSpec {
    GridMode mode = GridMode::Geometric;
    int num_points = 100;
    double min_ratio = 1e-3;
    double step = 0.0;
    bool include_zero = true;
};

/// Strictly decreasing sequence starting at lambda_max.
/// allow_zero gates include_zero (the caller knows whether n_t > p).
std::vector<double> make_lambdas(const GridSpec& grid, double lambda_max, bool allow_zero);

} // namespace cvlasso
