#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "aos/config.hpp"
#include "aos/geometry.hpp"
#include "aos/image_io.hpp"
#include "aos/integration.hpp"
#include "aos/nelder_mead.hpp"
#include "aos/pose_io.hpp"
#include "aos/refine.hpp"
#include "aos/report.hpp"
#include "aos/simulate.hpp"
#include "aos/variance_model.hpp"

namespace aos::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "aos dataset v1";

// Carries an exit code out of a command.
struct Failure : std::runtime_error {
  Failure(int code, const std::string& message) : std::runtime_error(message), code(code) {}
  int code;
};

std::vector<double> split_numbers(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string token = text.substr(pos, comma - pos);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || end != token.data() + token.size() || !std::isfinite(v)) {
      throw Failure(kUsage, flag + ": '" + text + "' is not a comma separated list of numbers");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  if (out.size() != expected) throw Failure(kUsage, flag + " expects " + std::to_string(expected) + " values");
  return out;
}

Roi parse_roi(const std::string& text) {
  const auto v = split_numbers(text, 4, "--roi");
  for (double x : v) {
    if (x != std::floor(x) || x < 0.0 || x > 1e6) throw Failure(kUsage, "--roi expects non-negative integers");
  }
  return Roi{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure(kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Failure(kIo, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(kIo, "cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void make_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Failure(kIo, "cannot create directory " + dir.string());
}

std::string view_id(std::size_t i) {
  std::ostringstream s;
  s << "view_" << std::setw(3) << std::setfill('0') << i;
  return s.str();
}

json intrinsics_json(const CameraIntrinsics& K) {
  return {{"focal_length_px", K.focal_length_px},
          {"principal_point", {K.principal_point.x(), K.principal_point.y()}},
          {"width", K.width},
          {"height", K.height}};
}

json plane_json(const FocalPlane& p) {
  return {{"anchor", {p.anchor.x(), p.anchor.y(), p.anchor.z()}},
          {"normal", {p.unit_normal.x(), p.unit_normal.y(), p.unit_normal.z()}},
          {"extent", {p.raster_extent.x(), p.raster_extent.y()}},
          {"resolution", {p.cols, p.rows}}};
}

json roi_json(const Roi& r) { return {r.x, r.y, r.width, r.height}; }

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string config;
  std::string out;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  SimulationConfig config;
  try {
    config = opt.config.empty() ? SimulationConfig::benchmark() : parse_config(read_text(opt.config));
  } catch (const ConfigError& e) {
    throw Failure(kUsage, "config error: " + std::string(e.what()));
  }

  const fs::path dir(opt.out);
  make_directory(dir / "views");
  const RenderedViews views = render_views(config.scene, config.capture, config.plane, config.seed);
  const std::vector<PoseParams> noisy = perturb_poses(views.true_poses, config.perturbation);

  std::vector<PoseRecord> truth, perturbed;
  json images = json::array();
  for (std::size_t i = 0; i < views.images.size(); ++i) {
    const std::string id = view_id(i);
    const fs::path file = fs::path("views") / (id + ".pfm");
    write_pfm(dir / file, views.images[i]);
    truth.push_back({id, file, views.true_poses[i]});
    perturbed.push_back({id, file, noisy[i]});
    images.push_back(file.generic_string());
  }
  write_pose_records(dir / "poses_true.txt", truth);
  write_pose_records(dir / "poses_noisy.txt", perturbed);
  write_pfm(dir / "reference.pfm", views.reference);
  write_text(dir / "config.ini", to_ini(config));

  json manifest;
  manifest["format"] = kManifestFormat;
  manifest["config"] = "config.ini";
  manifest["intrinsics"] = intrinsics_json(config.capture.intrinsics);
  manifest["plane"] = plane_json(config.plane);
  manifest["roi"] = roi_json(config.roi);
  manifest["images"] = images;
  manifest["poses_true"] = "poses_true.txt";
  manifest["poses_noisy"] = "poses_noisy.txt";
  manifest["reference"] = "reference.pfm";
  manifest["occlusion_probability"] =
      occlusion_probability(config.scene.occluders.density, config.scene.occluders.radius);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "wrote " << views.images.size() << " views to " << dir.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------------ refine

struct Manifest {
  CameraIntrinsics K;
  FocalPlane plane;
  Roi roi;
  fs::path poses_noisy;
  std::optional<fs::path> poses_true;
  std::optional<fs::path> reference;
};

Manifest load_manifest(const fs::path& dataset) {
  const fs::path file = dataset / "manifest.json";
  json j;
  try {
    j = json::parse(read_text(file));
  } catch (const json::exception& e) {
    throw Failure(kIo, "malformed manifest " + file.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kManifestFormat) throw Failure(kIo, "unsupported manifest format");
    Manifest m;
    const json& k = j.at("intrinsics");
    m.K.focal_length_px = k.at("focal_length_px").get<double>();
    m.K.principal_point = Vec2(k.at("principal_point").at(0).get<double>(), k.at("principal_point").at(1).get<double>());
    m.K.width = k.at("width").get<int>();
    m.K.height = k.at("height").get<int>();
    m.K.validate();
    const json& p = j.at("plane");
    m.plane.anchor = Vec3(p.at("anchor").at(0).get<double>(), p.at("anchor").at(1).get<double>(),
                          p.at("anchor").at(2).get<double>());
    m.plane.unit_normal = Vec3(p.at("normal").at(0).get<double>(), p.at("normal").at(1).get<double>(),
                               p.at("normal").at(2).get<double>());
    m.plane.raster_extent = Vec2(p.at("extent").at(0).get<double>(), p.at("extent").at(1).get<double>());
    m.plane.cols = p.at("resolution").at(0).get<int>();
    m.plane.rows = p.at("resolution").at(1).get<int>();
    m.plane.validate();
    const json& r = j.at("roi");
    m.roi = Roi{r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<int>()};
    m.poses_noisy = dataset / j.at("poses_noisy").get<std::string>();
    if (j.contains("poses_true")) m.poses_true = dataset / j.at("poses_true").get<std::string>();
    if (j.contains("reference")) m.reference = dataset / j.at("reference").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw Failure(kIo, "invalid manifest " + file.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw Failure(kIo, "invalid manifest " + file.string() + ": " + e.what());
  }
}

struct RefineOptions {
  std::string dataset;
  std::string out;
  std::string poses;
  std::string space = "three";
  std::string strategy = "early";
  int patience = 1;
  std::string roi;
  std::optional<double> plane_z;
  bool auto_plane = false;
  std::string z_range = "-5,5";
  int z_steps = 21;
  bool tilt = false;
  std::string glv_region = "roi";
};

std::vector<PoseRecord> read_records(const fs::path& path) {
  try {
    return read_pose_records(path, false);
  } catch (const PoseFileError& e) {
    throw Failure(kUsage, path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw Failure(kIo, e.what());
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int cmd_refine(const RefineOptions& opt, std::ostream& out, std::ostream& err) {
  SearchSpace space;
  StrategyConfig strategy;
  try {
    space = SearchSpace::from_name(opt.space);
    strategy.kind = strategy_from_name(opt.strategy);
    strategy.patience = opt.patience;
    strategy.validate();
  } catch (const std::invalid_argument& e) {
    throw Failure(kUsage, e.what());
  }
  if (opt.glv_region != "roi" && opt.glv_region != "frame") throw Failure(kUsage, "--glv-region must be roi or frame");
  strategy.glv_region = opt.glv_region == "roi" ? GlvRegion::Roi : GlvRegion::Frame;
  if (opt.plane_z && opt.auto_plane) throw Failure(kUsage, "--plane-z and --auto-plane are exclusive");

  RunReport report;
  const auto t_load = Clock::now();
  const fs::path dataset(opt.dataset);
  const Manifest manifest = load_manifest(dataset);
  const fs::path pose_file = opt.poses.empty() ? manifest.poses_noisy : fs::path(opt.poses);
  const std::vector<PoseRecord> records = read_records(pose_file);

  std::vector<ImageRaster> images;
  std::vector<PoseParams> initial;
  std::vector<std::size_t> record_of;  // loaded index -> record index
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      ImageRaster image = read_image(resolve_image(pose_file, records[i]));
      if (image.width() != manifest.K.width || image.height() != manifest.K.height) {
        throw ImageIoError("image size does not match the camera");
      }
      images.push_back(std::move(image));
      initial.push_back(records[i].pose);
      record_of.push_back(i);
      report.images.push_back(records[i].id);
    } catch (const ImageIoError& e) {
      report.failures.push_back({records[i].id, e.what()});
    }
  }
  if (images.size() < 2) {
    throw Failure(kInsufficientData, "need at least 2 images, loaded " + std::to_string(images.size()));
  }
  report.timings.emplace_back("load", seconds_since(t_load));

  const Roi roi = opt.roi.empty() ? manifest.roi : parse_roi(opt.roi);
  if (!roi.fits(manifest.plane.cols, manifest.plane.rows)) throw Failure(kUsage, "--roi does not fit the plane raster");

  const NelderMeadConfig nm = default_refine_config();
  FocalPlane plane = manifest.plane;
  const auto t_plane = Clock::now();
  if (opt.plane_z) {
    plane = tilted_plane(manifest.plane, *opt.plane_z, 0.0, 0.0);
  } else if (opt.auto_plane) {
    const auto range = split_numbers(opt.z_range, 2, "--z-range");
    if (!(range[0] <= range[1]) || opt.z_steps < 1) throw Failure(kUsage, "invalid plane search range");
    PlaneSearch search{range[0], range[1], opt.z_steps, opt.tilt};
    try {
      plane = optimize_focal_plane(images, initial, manifest.K, manifest.plane, roi, search, nm);
    } catch (const InsufficientPixels& e) {
      throw Failure(kInsufficientData, std::string("focal plane search: ") + e.what());
    }
    report.timings.emplace_back("focal_plane", seconds_since(t_plane));
  }

  const auto t_refine = Clock::now();
  RefinementResult result;
  try {
    result = run_strategy(images, initial, manifest.K, plane, roi, space, strategy, nm);
  } catch (const InsufficientPixels& e) {
    throw Failure(kInsufficientData, e.what());
  }
  report.timings.emplace_back("refine", seconds_since(t_refine));

  const auto t_write = Clock::now();
  std::vector<std::size_t> final_order;
  for (std::size_t i : result.processed) {
    if (result.included[i]) final_order.push_back(i);
  }
  const IntegralAccumulator acc = integrate(images, result.corrected_poses, final_order, manifest.K, plane, roi);

  const fs::path dir(opt.out);
  make_directory(dir);
  write_pfm(dir / "integral.pfm", acc.integral());
  write_preview_pgm(dir / "integral_preview.pgm", acc.integral());

  // Image paths are rewritten relative to the output directory.
  std::vector<PoseRecord> refined = records;
  const fs::path out_abs = fs::absolute(dir).lexically_normal();
  for (std::size_t i = 0; i < refined.size(); ++i) {
    refined[i].image = fs::absolute(resolve_image(pose_file, records[i])).lexically_normal().lexically_relative(out_abs);
  }
  for (std::size_t k = 0; k < images.size(); ++k) refined[record_of[k]].pose = result.corrected_poses[k];
  write_pose_records(dir / "poses_refined.txt", refined);

  report.config = {{"dataset", opt.dataset},
                   {"poses", pose_file.generic_string()},
                   {"space", space.name()},
                   {"strategy", std::string(to_string(strategy.kind))},
                   {"patience", strategy.patience},
                   {"glv_region", opt.glv_region},
                   {"roi", roi_json(roi)},
                   {"plane", plane_json(plane)},
                   {"plane_selection", opt.plane_z ? "fixed" : (opt.auto_plane ? "auto" : "manifest")},
                   {"intrinsics", intrinsics_json(manifest.K)},
                   {"nelder_mead",
                    {{"reflection", nm.reflection},
                     {"expansion", nm.expansion},
                     {"contraction", nm.contraction},
                     {"shrink", nm.shrink},
                     {"f_tolerance", nm.f_tolerance},
                     {"x_tolerance", nm.x_tolerance},
                     {"max_iterations", nm.max_iterations}}}};
  if (opt.auto_plane) {
    report.config["plane_search"] = {{"z_range", split_numbers(opt.z_range, 2, "--z-range")},
                                     {"z_steps", opt.z_steps},
                                     {"tilt", opt.tilt}};
  }
  report.order = result.order;
  report.processed = result.processed;
  report.objective_trace = result.objective_trace;
  report.n_stop = result.n_stop;
  for (std::size_t i : final_order) report.included.push_back(report.images[i]);
  for (const StepFailure& f : result.failures) report.failures.push_back({report.images[f.image], f.message});

  ReportMetrics& m = report.metrics;
  m.objective_before = result.initial_objective;
  m.objective_after = result.final_objective;
  m.gain_percent = result.initial_objective != 0.0 ? 100.0 * (result.final_objective / result.initial_objective - 1.0) : 0.0;
  m.parameter_evaluations = result.parameter_evaluations;
  m.baseline_parameters = 6 * images.size();
  m.parameter_reduction_percent =
      100.0 * (1.0 - static_cast<double>(m.parameter_evaluations) / static_cast<double>(m.baseline_parameters));
  m.objective_evaluations = result.objective_evaluations;
  m.refinement_decreases = static_cast<std::size_t>(
      std::count_if(result.refinement_gains.begin(), result.refinement_gains.end(), [](double g) { return g < 0.0; }));

  if (manifest.poses_true && fs::exists(*manifest.poses_true)) {
    std::vector<PoseParams> truth(images.size());
    std::map<std::string, PoseParams> by_id;
    for (const PoseRecord& r : read_records(*manifest.poses_true)) by_id[r.id] = r.pose;
    bool complete = true;
    for (std::size_t k = 0; k < images.size() && complete; ++k) {
      const auto it = by_id.find(report.images[k]);
      complete = it != by_id.end();
      if (complete) truth[k] = it->second;
    }
    if (complete) {
      m.pose_error = pose_error_summary(evaluate_poses(result, initial, truth));
    } else {
      err << "warning: true poses do not cover every image; pose errors omitted\n";
    }
  }
  if (manifest.reference && fs::exists(*manifest.reference)) {
    const ImageRaster reference = read_pfm(*manifest.reference);
    if (reference.width() == plane.cols && reference.height() == plane.rows) {
      try {
        m.psnr_db = psnr(acc.integral(), reference, roi);
      } catch (const InsufficientPixels&) {
        err << "warning: no overlap with the reference; PSNR omitted\n";
      }
    }
  }

  write_text(dir / "report.json", serialize_report(report));
  report.timings.emplace_back("write", seconds_since(t_write));
  write_text(dir / "timings.json", timings_to_json(report).dump(2) + "\n");

  out << "images " << images.size() << ", integrated " << result.n_stop << ", normalized variance "
      << result.initial_objective << " -> " << result.final_objective << " (" << std::showpos << std::fixed
      << std::setprecision(1) << m.gain_percent << std::noshowpos << "%)\n";
  out << std::defaultfloat << std::setprecision(6);
  if (m.pose_error) {
    out << "aligned position error " << m.pose_error->aligned_error_before << " m -> "
        << m.pose_error->aligned_error_after << " m\n";
  }
  out << "parameter evaluations " << m.parameter_evaluations << " of " << m.baseline_parameters << '\n';
  for (const ReportFailure& f : report.failures) err << "skipped " << f.image << ": " << f.message << '\n';
  return kOk;
}

// ---------------------------------------------------------- variance-model

struct VarianceOptions {
  OcclusionStats stats{0.5, 0.0, 1.0, 10.0, 4.0};
  int N = 10;
  std::size_t mc_pixels = 1000000;
  std::uint64_t seed = 1;
};

int cmd_variance_model(const VarianceOptions& opt, std::ostream& out) {
  try {
    opt.stats.validate();
  } catch (const std::invalid_argument& e) {
    throw Failure(kUsage, e.what());
  }
  if (opt.N < 1) throw Failure(kUsage, "N must be at least 1");
  if (opt.mc_pixels < 2) throw Failure(kUsage, "--mc-pixels must be at least 2");

  const ModelMoments model = model_moments(opt.stats, opt.N);
  const MonteCarloEstimate mc = monte_carlo_integral(opt.stats, opt.N, opt.mc_pixels, opt.seed);

  auto within = [](double a, double b, double se) {
    return std::abs(a - b) <= 3.0 * se + 1e-12 * std::max(1.0, std::abs(b));
  };
  const bool pass = within(mc.moments.variance, model.variance, mc.variance_standard_error) &&
                    within(mc.moments.mean, model.mean, mc.mean_standard_error);

  out << std::setprecision(10);
  out << "D=" << opt.stats.D << " mu_o=" << opt.stats.mu_o << " sigma2_o=" << opt.stats.sigma2_o
      << " mu_s=" << opt.stats.mu_s << " sigma2_s=" << opt.stats.sigma2_s << " N=" << opt.N
      << " pixels=" << mc.num_pixels << " seed=" << opt.seed << '\n';
  out << "var_single\t" << var_single(opt.stats) << '\n';
  out << "var_integral\t" << var_integral(opt.stats, opt.N) << '\n';
  out << "quantity\tclosed_form\tmonte_carlo\tstandard_error\n";
  out << "mean\t" << model.mean << '\t' << mc.moments.mean << '\t' << mc.mean_standard_error << '\n';
  out << "second_moment\t" << model.second_moment << '\t' << mc.moments.second_moment << "\t-\n";
  out << "variance\t" << model.variance << '\t' << mc.moments.variance << '\t' << mc.variance_standard_error << '\n';
  out << (pass ? "PASS" : "FAIL") << " (3 standard errors)\n";
  return kOk;
}

// ------------------------------------------------------- pose-error-curves

struct CurveOptions {
  double tz = 30.0;
  double f = 1000.0;
  int size = 1024;
  std::string out;
};

int cmd_pose_error_curves(const CurveOptions& opt, std::ostream& out) {
  if (!(opt.tz > 0.0) || !(opt.f > 0.0) || opt.size < 2) throw Failure(kUsage, "--tz, --f and --size must be positive");
  const CameraIntrinsics K{opt.f, Vec2(0.5 * opt.size, 0.5 * opt.size), opt.size, opt.size};
  const PoseParams pose{0.0, 0.0, opt.tz, 0.0, 0.0, 0.0};

  // Ground points under a 9x9 grid of pixels spanning the frame, and the
  // point under the principal point.
  auto ground_under = [&](double u, double v) {
    return Vec3((u - K.principal_point.x()) / opt.f * opt.tz, -(v - K.principal_point.y()) / opt.f * opt.tz, 0.0);
  };
  const std::vector<Vec3> center{ground_under(K.principal_point.x(), K.principal_point.y())};
  std::vector<Vec3> field;
  for (int j = 0; j < 9; ++j) {
    for (int i = 0; i < 9; ++i) field.push_back(ground_under((i + 0.5) * opt.size / 9.0, (j + 0.5) * opt.size / 9.0));
  }
  // Two points 200 px apart, symmetric about the principal point.
  const std::vector<Vec3> pair{ground_under(K.principal_point.x() - 100.0, K.principal_point.y()),
                               ground_under(K.principal_point.x() + 100.0, K.principal_point.y())};

  std::ostringstream table;
  table << std::setprecision(10);
  table << "step,delta_t[m],t_x_center[px],t_x_field[px],t_y_center[px],t_y_field[px],t_z_center[px],t_z_field[px],"
           "delta_angle[deg],alpha_center[px],alpha_field[px],beta_center[px],beta_field[px],gamma_center[px],"
           "gamma_field[px],beta_compensation_residual[px],gamma_best_translation_residual[px]\n";
  const int steps = 20;
  for (int s = -steps; s <= steps; ++s) {
    const double dt = 1.0 * s / steps;           // -1 .. 1 m
    const double deg = 2.0 * s / steps;          // -2 .. 2 degrees
    const double da = deg2rad(deg);
    table << s << ',' << dt;
    for (PoseParam p : {PoseParam::TX, PoseParam::TY, PoseParam::TZ}) {
      table << ',' << image_plane_error(K, pose, p, dt, center) << ',' << image_plane_error(K, pose, p, dt, field);
    }
    table << ',' << deg;
    for (PoseParam p : {PoseParam::Alpha, PoseParam::Beta, PoseParam::Gamma}) {
      table << ',' << image_plane_error(K, pose, p, da, center) << ',' << image_plane_error(K, pose, p, da, field);
    }
    PoseParams tilted = pose;
    tilted.beta += da;
    PoseParams compensated = pose;
    compensated.t_x = compensating_translation(da, TiltAxis::Beta, opt.tz);
    table << ',' << image_plane_error(K, tilted, compensated, center);

    PoseParams rolled = pose;
    rolled.gamma += da;
    const Objective residual = [&](std::span<const double> x) {
      PoseParams shifted = pose;
      shifted.t_x = x[0];
      shifted.t_y = x[1];
      return image_plane_error(K, rolled, shifted, pair);
    };
    NelderMeadConfig nm;
    nm.f_tolerance = 1e-12;
    const std::vector<double> start{0.0, 0.0};
    const std::vector<double> step{0.1, 0.1};
    table << ',' << nelder_mead(residual, start, nm, Sense::Minimize, step).f << '\n';
  }

  if (opt.out.empty() || opt.out == "-") {
    out << table.str();
  } else {
    write_text(opt.out, table.str());
    out << "wrote " << 2 * steps + 1 << " rows to " << opt.out << '\n';
  }
  return kOk;
}

// --------------------------------------------------------------- integrate

struct IntegrateOptions {
  std::string dataset;
  std::string poses;
  std::string out;
  std::optional<double> plane_z;
};

int cmd_integrate(const IntegrateOptions& opt, std::ostream& out) {
  const Manifest manifest = load_manifest(opt.dataset);
  const fs::path pose_file = opt.poses.empty() ? manifest.poses_noisy : fs::path(opt.poses);
  const std::vector<PoseRecord> records = read_records(pose_file);
  const FocalPlane plane = opt.plane_z ? tilted_plane(manifest.plane, *opt.plane_z, 0.0, 0.0) : manifest.plane;

  IntegralAccumulator acc(plane.cols, plane.rows, manifest.roi);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ImageRaster image = read_image(resolve_image(pose_file, records[i]));
    acc.accumulate(warp_to_plane(image, manifest.K, records[i].pose, plane), i);
  }
  if (acc.N() < 1) throw Failure(kInsufficientData, "no images to integrate");
  const fs::path dir(opt.out);
  make_directory(dir);
  write_pfm(dir / "integral.pfm", acc.integral());
  write_preview_pgm(dir / "integral_preview.pgm", acc.integral());
  out << "integrated " << acc.N() << " images, normalized variance " << acc.objective_trace().back() << '\n';
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic-aperture integral imaging with pose refinement by normalized variance", "aosrefine"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Render a synthetic dataset");
  simulate->add_option("--config", sim.config, "Scene configuration (INI); defaults to the benchmark");
  simulate->add_option("--out", sim.out, "Output dataset directory")->required();

  RefineOptions ref;
  auto* refine = app.add_subcommand("refine", "Refine poses and integrate a dataset");
  refine->add_option("--dataset", ref.dataset, "Dataset directory containing manifest.json")->required();
  refine->add_option("--out", ref.out, "Output directory")->required();
  refine->add_option("--poses", ref.poses, "Pose record file (default: the dataset's perturbed poses)");
  refine->add_option("--space", ref.space, "Search space: six, four, three or two")->capture_default_str();
  refine->add_option("--strategy", ref.strategy, "Strategy: brute, early or select")->capture_default_str();
  refine->add_option("--patience", ref.patience, "Early-stopping patience")->capture_default_str();
  refine->add_option("--roi", ref.roi, "Objective region x,y,w,h on the plane raster");
  refine->add_option("--plane-z", ref.plane_z, "Horizontal focal plane at this height");
  refine->add_flag("--auto-plane", ref.auto_plane, "Search the focal plane height before refinement");
  refine->add_option("--z-range", ref.z_range, "Plane search range zmin,zmax")->capture_default_str();
  refine->add_option("--z-steps", ref.z_steps, "Plane search grid steps")->capture_default_str();
  refine->add_flag("--tilt", ref.tilt, "Also search the plane orientation");
  refine->add_option("--glv-region", ref.glv_region, "Image ranking region: roi or frame")->capture_default_str();

  VarianceOptions var;
  auto* variance = app.add_subcommand("variance-model", "Compare the occlusion variance model with Monte Carlo");
  variance->add_option("--D", var.stats.D, "Occlusion probability")->capture_default_str();
  variance->add_option("--mu-o", var.stats.mu_o, "Occluder mean")->capture_default_str();
  variance->add_option("--sigma2-o", var.stats.sigma2_o, "Occluder variance")->capture_default_str();
  variance->add_option("--mu-s", var.stats.mu_s, "Signal mean")->capture_default_str();
  variance->add_option("--sigma2-s", var.stats.sigma2_s, "Signal variance")->capture_default_str();
  variance->add_option("--N", var.N, "Number of integrated views")->capture_default_str();
  variance->add_option("--mc-pixels", var.mc_pixels, "Monte Carlo pixels")->capture_default_str();
  variance->add_option("--seed", var.seed, "Monte Carlo seed")->capture_default_str();

  CurveOptions curves;
  auto* curve = app.add_subcommand("pose-error-curves", "Image-plane error against each pose parameter error");
  curve->add_option("--tz", curves.tz, "Camera height in meters")->capture_default_str();
  curve->add_option("--f", curves.f, "Focal length in pixels")->capture_default_str();
  curve->add_option("--size", curves.size, "Square image size in pixels")->capture_default_str();
  curve->add_option("--out", curves.out, "Output table (CSV); standard output when omitted");

  IntegrateOptions integ;
  auto* integrate_cmd = app.add_subcommand("integrate", "Integrate a dataset at given poses without refinement");
  integrate_cmd->add_option("--dataset", integ.dataset, "Dataset directory containing manifest.json")->required();
  integrate_cmd->add_option("--poses", integ.poses, "Pose record file");
  integrate_cmd->add_option("--out", integ.out, "Output directory")->required();
  integrate_cmd->add_option("--plane-z", integ.plane_z, "Horizontal focal plane at this height");

  std::vector<std::string> argv_store{"aosrefine"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (refine->parsed()) return cmd_refine(ref, out, err);
    if (variance->parsed()) return cmd_variance_model(var, out);
    if (curve->parsed()) return cmd_pose_error_curves(curves, out);
    if (integrate_cmd->parsed()) return cmd_integrate(integ, out);
  } catch (const Failure& e) {
    err << "error: " << e.what() << '\n';
    return e.code;
  } catch (const ImageIoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const PoseFileError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

}  // namespace aos::cli
