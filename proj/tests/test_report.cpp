#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "aos/report.hpp"

using namespace aos;

namespace {

RunReport sample_report() {
  RunReport r;
  r.config = {{"strategy", "early"}, {"space", "three"}, {"roi", {64, 64, 128, 128}}, {"plane_z", 0.0}};
  r.images = {"views/view_000.pfm", "views/view_001.pfm", "views/view_002.pfm"};
  r.order = {2, 0, 1};
  r.processed = {2, 0, 1};
  r.objective_trace = {412.5, 0.1 + 0.2, std::numeric_limits<double>::quiet_NaN()};
  r.n_stop = 2;
  r.included = {"views/view_000.pfm", "views/view_002.pfm"};
  r.failures = {{"views/view_001.pfm", "too few valid pixels"}};
  ReportMetrics& m = r.metrics;
  m.objective_before = 1.0 / 3.0;
  m.objective_after = 2.0 / 3.0;
  m.gain_percent = 100.0;
  m.parameter_evaluations = 6;
  m.baseline_parameters = 18;
  m.parameter_reduction_percent = 200.0 / 3.0;
  m.objective_evaluations = 123;
  m.refinement_decreases = 0;
  PoseErrorSummary e;
  e.rmse_before = {0.3, 0.25, 0.0, 0.0, 0.0, 0.5};
  e.rmse_after = {0.01, 0.02, 0.0, 0.0, 0.0, 0.05};
  e.aligned_error_before = 0.36;
  e.aligned_error_after = 0.03;
  e.error_reduction_percent = 91.66666666666667;
  m.pose_error = e;
  m.psnr_db = 27.125;
  r.timings = {{"load", 0.25}, {"refine", 1.5}};
  return r;
}

}  // namespace

TEST_CASE("serialization round trip is byte-identical") {
  const RunReport r = sample_report();
  const std::string text = serialize_report(r);
  CHECK(text.back() == '\n');
  const RunReport back = parse_report(text);
  CHECK(back == r);
  CHECK(serialize_report(back) == text);
}

TEST_CASE("undefined values are null") {
  const nlohmann::json j = to_json(sample_report());
  CHECK(j.at("format") == "aos run report v1");
  CHECK(j.at("objective_trace")[2].is_null());
  const RunReport back = report_from_json(j);
  CHECK(std::isnan(back.objective_trace[2]));
}

TEST_CASE("optional metrics") {
  RunReport r = sample_report();
  r.metrics.pose_error.reset();
  r.metrics.psnr_db.reset();
  const nlohmann::json j = to_json(r);
  CHECK_FALSE(j.at("metrics").contains("pose_error"));
  CHECK_FALSE(j.at("metrics").contains("psnr_db"));
  CHECK(parse_report(serialize_report(r)) == r);
}

TEST_CASE("timings stay out of the report") {
  RunReport a = sample_report();
  RunReport b = a;
  b.timings = {{"load", 9.0}};
  CHECK(serialize_report(a) == serialize_report(b));
  const nlohmann::json t = timings_to_json(a);
  CHECK(t.at("units") == "s");
  CHECK(t.at("phases").at("load") == 0.25);
  CHECK(t.at("phases").at("refine") == 1.5);
}

TEST_CASE("pose errors are reported in degrees") {
  EvaluationMetrics m;
  m.rmse_before = {0.3, 0.2, 0.1, std::numbers::pi / 180.0, 0.0, std::numbers::pi / 360.0};
  m.rmse_after[4] = std::numbers::pi / 90.0;
  m.aligned_error_before = 0.4;
  const PoseErrorSummary s = pose_error_summary(m);
  CHECK(s.rmse_before[0] == 0.3);
  CHECK(s.rmse_before[3] == doctest::Approx(1.0));
  CHECK(s.rmse_before[5] == doctest::Approx(0.5));
  CHECK(s.rmse_after[4] == doctest::Approx(2.0));
  CHECK(s.aligned_error_before == 0.4);
}

TEST_CASE("foreign documents are rejected") {
  CHECK_THROWS(parse_report("{\"format\": \"something else\"}"));
  CHECK_THROWS(parse_report("not json"));
  nlohmann::json j = to_json(sample_report());
  j.at("metrics").erase("gain_percent");
  CHECK_THROWS(report_from_json(j));
}
