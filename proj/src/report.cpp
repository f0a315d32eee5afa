#include "aos/report.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aos {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "aos run report v1";

json params_to_json(const std::array<double, 6>& v) {
  json j = json::object();
  for (PoseParam p : kAllPoseParams) j[std::string(to_string(p))] = v[static_cast<std::size_t>(p)];
  return j;
}

std::array<double, 6> params_from_json(const json& j) {
  std::array<double, 6> v{};
  for (PoseParam p : kAllPoseParams) v[static_cast<std::size_t>(p)] = j.at(std::string(to_string(p))).get<double>();
  return v;
}

// JSON has no NaN; undefined objectives are stored as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

bool same_trace(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] == b[i] || (std::isnan(a[i]) && std::isnan(b[i])))) return false;
  }
  return true;
}

}  // namespace

PoseErrorSummary pose_error_summary(const EvaluationMetrics& m) {
  PoseErrorSummary s;
  for (PoseParam p : kAllPoseParams) {
    const auto i = static_cast<std::size_t>(p);
    s.rmse_before[i] = is_angle(p) ? rad2deg(m.rmse_before[i]) : m.rmse_before[i];
    s.rmse_after[i] = is_angle(p) ? rad2deg(m.rmse_after[i]) : m.rmse_after[i];
  }
  s.aligned_error_before = m.aligned_error_before;
  s.aligned_error_after = m.aligned_error_after;
  s.error_reduction_percent = m.error_reduction_percent;
  return s;
}

bool RunReport::operator==(const RunReport& o) const {
  return config == o.config && images == o.images && order == o.order && processed == o.processed &&
         same_trace(objective_trace, o.objective_trace) && n_stop == o.n_stop && included == o.included &&
         failures == o.failures && metrics == o.metrics;
}

json to_json(const RunReport& r) {
  json j;
  j["format"] = kFormat;
  j["config"] = r.config;
  j["images"] = r.images;
  j["order"] = r.order;
  j["processed"] = r.processed;
  json trace = json::array();
  for (double v : r.objective_trace) trace.push_back(number_or_null(v));
  j["objective_trace"] = std::move(trace);
  j["n_stop"] = r.n_stop;
  j["included"] = r.included;
  json failures = json::array();
  for (const ReportFailure& f : r.failures) failures.push_back({{"image", f.image}, {"message", f.message}});
  j["failures"] = std::move(failures);

  const ReportMetrics& m = r.metrics;
  json metrics;
  metrics["objective_before"] = number_or_null(m.objective_before);
  metrics["objective_after"] = number_or_null(m.objective_after);
  metrics["gain_percent"] = number_or_null(m.gain_percent);
  metrics["parameter_evaluations"] = m.parameter_evaluations;
  metrics["baseline_parameters"] = m.baseline_parameters;
  metrics["parameter_reduction_percent"] = m.parameter_reduction_percent;
  metrics["objective_evaluations"] = m.objective_evaluations;
  metrics["refinement_decreases"] = m.refinement_decreases;
  if (m.pose_error) {
    const PoseErrorSummary& e = *m.pose_error;
    metrics["pose_error"] = {{"units", "m, deg"},
                             {"rmse_before", params_to_json(e.rmse_before)},
                             {"rmse_after", params_to_json(e.rmse_after)},
                             {"aligned_error_before", e.aligned_error_before},
                             {"aligned_error_after", e.aligned_error_after},
                             {"error_reduction_percent", number_or_null(e.error_reduction_percent)}};
  }
  if (m.psnr_db) metrics["psnr_db"] = *m.psnr_db;
  j["metrics"] = std::move(metrics);
  return j;
}

RunReport report_from_json(const json& j) {
  if (j.value("format", std::string()) != kFormat) throw std::runtime_error("not an aos run report");
  RunReport r;
  r.config = j.at("config");
  r.images = j.at("images").get<std::vector<std::string>>();
  r.order = j.at("order").get<std::vector<std::size_t>>();
  r.processed = j.at("processed").get<std::vector<std::size_t>>();
  for (const json& v : j.at("objective_trace")) r.objective_trace.push_back(number_from(v));
  r.n_stop = j.at("n_stop").get<std::size_t>();
  r.included = j.at("included").get<std::vector<std::string>>();
  for (const json& f : j.at("failures")) r.failures.push_back({f.at("image").get<std::string>(), f.at("message").get<std::string>()});

  const json& metrics = j.at("metrics");
  ReportMetrics& m = r.metrics;
  m.objective_before = number_from(metrics.at("objective_before"));
  m.objective_after = number_from(metrics.at("objective_after"));
  m.gain_percent = number_from(metrics.at("gain_percent"));
  m.parameter_evaluations = metrics.at("parameter_evaluations").get<std::size_t>();
  m.baseline_parameters = metrics.at("baseline_parameters").get<std::size_t>();
  m.parameter_reduction_percent = metrics.at("parameter_reduction_percent").get<double>();
  m.objective_evaluations = metrics.at("objective_evaluations").get<std::size_t>();
  m.refinement_decreases = metrics.at("refinement_decreases").get<std::size_t>();
  if (metrics.contains("pose_error")) {
    const json& e = metrics.at("pose_error");
    PoseErrorSummary s;
    s.rmse_before = params_from_json(e.at("rmse_before"));
    s.rmse_after = params_from_json(e.at("rmse_after"));
    s.aligned_error_before = e.at("aligned_error_before").get<double>();
    s.aligned_error_after = e.at("aligned_error_after").get<double>();
    s.error_reduction_percent = number_from(e.at("error_reduction_percent"));
    m.pose_error = s;
  }
  if (metrics.contains("psnr_db")) m.psnr_db = metrics.at("psnr_db").get<double>();
  return r;
}

json timings_to_json(const RunReport& r) {
  json phases = json::object();
  for (const auto& [name, seconds] : r.timings) phases[name] = seconds;
  return {{"units", "s"}, {"phases", phases}};
}

std::string serialize_report(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

RunReport parse_report(std::string_view text) { return report_from_json(json::parse(text)); }

}  // namespace aos
