#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "aos/simulate.hpp"

namespace aos {

/// Pose errors in report units: meters for translations, degrees for angles.
struct PoseErrorSummary {
  std::array<double, 6> rmse_before{};  ///< indexed by PoseParam
  std::array<double, 6> rmse_after{};
  double aligned_error_before = 0.0;
  double aligned_error_after = 0.0;
  double error_reduction_percent = 0.0;

  bool operator==(const PoseErrorSummary&) const = default;
};

struct ReportMetrics {
  double objective_before = 0.0;
  double objective_after = 0.0;
  double gain_percent = 0.0;
  std::size_t parameter_evaluations = 0;
  std::size_t baseline_parameters = 0;
  double parameter_reduction_percent = 0.0;
  std::size_t objective_evaluations = 0;
  /// Optimized images whose refined objective fell below the initial pose's.
  std::size_t refinement_decreases = 0;
  std::optional<PoseErrorSummary> pose_error;  ///< only when true poses are known
  std::optional<double> psnr_db;               ///< only when a reference image is known

  bool operator==(const ReportMetrics&) const = default;
};

/// Converts evaluation output (radians) to report units.
PoseErrorSummary pose_error_summary(const EvaluationMetrics& m);

struct ReportFailure {
  std::string image;
  std::string message;

  bool operator==(const ReportFailure&) const = default;
};

/// Outcome of one refine run. Timings are kept apart from the rest so that
/// the serialized report is deterministic.
struct RunReport {
  nlohmann::json config;  ///< echo of the run settings
  std::vector<std::string> images;
  std::vector<std::size_t> order;
  std::vector<std::size_t> processed;
  std::vector<double> objective_trace;  ///< NaN where the objective was undefined
  std::size_t n_stop = 0;
  std::vector<std::string> included;
  std::vector<ReportFailure> failures;
  ReportMetrics metrics;
  std::vector<std::pair<std::string, double>> timings;  ///< seconds per phase

  bool operator==(const RunReport& other) const;
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
nlohmann::json timings_to_json(const RunReport& report);

/// Pretty-printed JSON with a trailing newline. Parsing and serializing again
/// reproduces the same bytes.
std::string serialize_report(const RunReport& report);
RunReport parse_report(std::string_view text);

}  // namespace aos
