#pragma once

#include <filesystem>
#include <span>

#include <json.hpp>

#include "cvlasso/bounds.hpp"
#include "cvlasso/experiments.hpp"
#include "cvlasso/selection.hpp"
#include "cvlasso/solvers.hpp"

namespace cvlasso {

nlohmann::ordered_json to_json(const SimulationConfig& cfg);
nlohmann::ordered_json to_json(const MethodMetrics& m);
nlohmann::ordered_json to_json(const FitResult& fit);
nlohmann::ordered_json to_json(const BoundReport& report);
nlohmann::ordered_json to_json(const SelectionResult& selection);
nlohmann::ordered_json to_json(const ExperimentReport& report);
nlohmann::ordered_json to_json(std::span<const ExperimentReport> reports);
nlohmann::ordered_json to_json(const CoverageReport& report);

/// Pretty-printed (indent 2) with a trailing newline. Throws IoError.
void save_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);

/// replication, then lasso_b1..lasso_b10 and comparator_b1..comparator_b10 (b7..b10 are the worst zeros).
void save_boxplot_csv(const ExperimentReport& report, const std::filesystem::path& path);
/// replication, lasso_gr2, comparator_gr2.
void save_gr2_csv(const ExperimentReport& report, const std::filesystem::path& path);
/// lambda, mean_ge, ge_fold0, ge_fold1, ...
void save_cv_curve_csv(const SelectionResult& selection, const std::filesystem::path& path);
/// One value per line.
void save_vector_csv(const Eigen::VectorXd& v, const std::string& header, const std::filesystem::path& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);

} // namespace cvlasso
