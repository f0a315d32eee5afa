#include "aos/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace aos {

ConfigError::ConfigError(const std::string& message, int line, std::string key)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line),
      key_(std::move(key)) {}

Roi central_roi(const FocalPlane& plane) {
  const int x = plane.cols / 4;
  const int y = plane.rows / 4;
  return Roi{x, y, plane.cols - 2 * x, plane.rows - 2 * y};
}

SimulationConfig SimulationConfig::benchmark() {
  SimulationConfig c;
  c.scene.occluders.density = std::log(2.0) / (kPi * 0.25);
  c.scene.occluders.radius = 0.5;
  c.perturbation.sigma = {0.3, 0.3, 0.0, 0.0, 0.0, deg2rad(0.5)};
  c.scene.texture.seed = c.seed;
  c.perturbation.seed = c.seed;
  c.plane = FocalPlane::horizontal(0.0, Vec2::Zero(), Vec2(25.6, 25.6), 256, 256);
  c.roi = central_roi(c.plane);
  return c;
}

void SimulationConfig::validate() const {
  try {
    scene.validate();
    capture.validate(scene);
    perturbation.validate();
    plane.validate();
    roi.validate(plane.cols, plane.rows);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// One `key = value` line being applied.
struct Setting {
  std::string key;  // section.name
  std::string_view value;
  int line;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key + ": " + what, line, key); }

  std::vector<double> numbers(std::size_t expected) const {
    std::vector<double> out;
    for (std::string_view token : split_ws(value)) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || end != token.data() + token.size() || !std::isfinite(v)) {
        fail("'" + std::string(token) + "' is not a finite number");
      }
      out.push_back(v);
    }
    if (expected > 0 && out.size() != expected) fail("expected " + std::to_string(expected) + " value(s)");
    if (out.empty()) fail("expected at least one value");
    return out;
  }
  double number() const { return numbers(1)[0]; }
  double non_negative() const {
    const double v = number();
    if (v < 0.0) fail("must be non-negative");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  std::vector<long long> integers(std::size_t expected) const {
    std::vector<long long> out;
    for (std::string_view token : split_ws(value)) {
      long long v = 0;
      const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || end != token.data() + token.size()) fail("'" + std::string(token) + "' is not an integer");
      out.push_back(v);
    }
    if (out.size() != expected) fail("expected " + std::to_string(expected) + " integer(s)");
    return out;
  }
  int count() const {
    const long long v = integers(1)[0];
    if (v < 1 || v > 100000) fail("must be a positive integer");
    return static_cast<int>(v);
  }
  std::uint64_t seed() const {
    std::uint64_t v = 0;
    const std::string_view t = trim(value);
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size() || t.empty()) fail("must be a non-negative integer");
    return v;
  }
};

using Handler = std::function<void(SimulationConfig&, const Setting&)>;

std::size_t idx(PoseParam p) { return static_cast<std::size_t>(p); }

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = [] {
    std::map<std::string, Handler> h;
    h["simulation.seed"] = [](SimulationConfig& c, const Setting& s) { c.seed = s.seed(); };

    h["scene.ground_extent"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.numbers(2);
      if (!(v[0] > 0.0 && v[1] > 0.0)) s.fail("must be positive");
      c.scene.ground_extent = Vec2(v[0], v[1]);
    };
    h["scene.ground_tilt"] = [](SimulationConfig& c, const Setting& s) {
      const double deg = s.number();
      if (std::abs(deg) >= 60.0) s.fail("must lie within (-60, 60) degrees");
      c.scene.ground_tilt = deg2rad(deg);
    };
    h["scene.texture_base"] = [](SimulationConfig& c, const Setting& s) { c.scene.texture.base_intensity = s.number(); };
    h["scene.texture_variance"] = [](SimulationConfig& c, const Setting& s) { c.scene.texture.variance = s.non_negative(); };
    h["scene.texture_spacings"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.numbers(0);
      for (double x : v) {
        if (!(x > 0.0)) s.fail("spacings must be positive");
      }
      c.scene.texture.lattice_spacings = v;
    };
    h["scene.texture_seed"] = [](SimulationConfig& c, const Setting& s) { c.scene.texture.seed = s.seed(); };

    h["target.center"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.numbers(2);
      c.scene.targets.back().center = Vec2(v[0], v[1]);
    };
    h["target.radius"] = [](SimulationConfig& c, const Setting& s) { c.scene.targets.back().radius = s.positive(); };
    h["target.intensity"] = [](SimulationConfig& c, const Setting& s) { c.scene.targets.back().intensity = s.number(); };

    h["occluders.density"] = [](SimulationConfig& c, const Setting& s) { c.scene.occluders.density = s.non_negative(); };
    h["occluders.radius"] = [](SimulationConfig& c, const Setting& s) { c.scene.occluders.radius = s.positive(); };
    h["occluders.height"] = [](SimulationConfig& c, const Setting& s) { c.scene.occluders.height = s.number(); };
    h["occluders.intensity_mean"] = [](SimulationConfig& c, const Setting& s) {
      c.scene.occluders.intensity_mean = s.number();
    };
    h["occluders.intensity_variance"] = [](SimulationConfig& c, const Setting& s) {
      c.scene.occluders.intensity_variance = s.non_negative();
    };

    h["capture.rows"] = [](SimulationConfig& c, const Setting& s) { c.capture.rows = s.count(); };
    h["capture.cols"] = [](SimulationConfig& c, const Setting& s) { c.capture.cols = s.count(); };
    h["capture.aperture_diameter"] = [](SimulationConfig& c, const Setting& s) {
      c.capture.aperture_diameter = s.non_negative();
    };
    h["capture.altitude"] = [](SimulationConfig& c, const Setting& s) { c.capture.altitude = s.positive(); };
    h["capture.focal_length"] = [](SimulationConfig& c, const Setting& s) {
      c.capture.intrinsics.focal_length_px = s.positive();
    };
    h["capture.principal_point"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.numbers(2);
      c.capture.intrinsics.principal_point = Vec2(v[0], v[1]);
    };
    h["capture.image_size"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.integers(2);
      if (v[0] < 1 || v[1] < 1 || v[0] > 65536 || v[1] > 65536) s.fail("must be positive");
      c.capture.intrinsics.width = static_cast<int>(v[0]);
      c.capture.intrinsics.height = static_cast<int>(v[1]);
    };
    h["capture.pixel_noise"] = [](SimulationConfig& c, const Setting& s) { c.capture.pixel_noise_sigma = s.non_negative(); };

    for (PoseParam p : kAllPoseParams) {
      h["perturbation." + std::string(to_string(p))] = [p](SimulationConfig& c, const Setting& s) {
        const double v = s.non_negative();
        c.perturbation.sigma[idx(p)] = is_angle(p) ? deg2rad(v) : v;
      };
    }
    h["perturbation.seed"] = [](SimulationConfig& c, const Setting& s) { c.perturbation.seed = s.seed(); };

    h["plane.z"] = [](SimulationConfig& c, const Setting& s) { c.plane.anchor.z() = s.number(); };
    h["plane.center"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.numbers(2);
      c.plane.anchor.x() = v[0];
      c.plane.anchor.y() = v[1];
    };
    h["plane.extent"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.numbers(2);
      if (!(v[0] > 0.0 && v[1] > 0.0)) s.fail("must be positive");
      c.plane.raster_extent = Vec2(v[0], v[1]);
    };
    h["plane.resolution"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.integers(2);
      if (v[0] < 2 || v[1] < 2 || v[0] > 65536 || v[1] > 65536) s.fail("must be at least 2 x 2");
      c.plane.cols = static_cast<int>(v[0]);
      c.plane.rows = static_cast<int>(v[1]);
    };
    h["plane.roi"] = [](SimulationConfig& c, const Setting& s) {
      const auto v = s.integers(4);
      for (long long x : v) {
        if (x < 0 || x > 65536) s.fail("must be non-negative pixel coordinates");
      }
      c.roi = Roi{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
    };
    return h;
  }();
  return table;
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"simulation", "scene", "target", "occluders", "capture", "perturbation", "plane"};
  return s;
}

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fmt(const Vec2& v) { return fmt(v.x()) + " " + fmt(v.y()); }

}  // namespace

SimulationConfig parse_config(std::string_view text) {
  SimulationConfig config = SimulationConfig::benchmark();
  bool texture_seed_set = false;
  bool perturbation_seed_set = false;
  bool roi_set = false;
  std::map<std::string, int> key_lines;

  std::string section;
  std::set<std::string> seen;  // keys seen in the current section instance
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_sections().count(section)) throw ConfigError("unknown section [" + section + "]", line_no, section);
      if (section == "target") {
        config.scene.targets.emplace_back();
      } else if (seen.count("[" + section + "]")) {
        throw ConfigError("section [" + section + "] appears twice", line_no, section);
      }
      std::set<std::string> next;
      for (const auto& k : seen) {
        if (k.front() == '[') next.insert(k);
      }
      next.insert("[" + section + "]");
      seen = std::move(next);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
    const std::string name(trim(line.substr(0, eq)));
    if (section.empty()) throw ConfigError("setting outside of any section", line_no, name);
    const Setting setting{section + "." + name, trim(line.substr(eq + 1)), line_no};
    const auto it = handlers().find(setting.key);
    if (it == handlers().end()) throw ConfigError("unknown key " + setting.key, line_no, setting.key);
    if (!seen.insert(setting.key).second) throw ConfigError("duplicate key " + setting.key, line_no, setting.key);
    key_lines[setting.key] = line_no;
    if (setting.value.empty()) setting.fail("missing value");
    it->second(config, setting);
    texture_seed_set |= setting.key == "scene.texture_seed";
    perturbation_seed_set |= setting.key == "perturbation.seed";
    roi_set |= setting.key == "plane.roi";
  }

  if (!texture_seed_set) config.scene.texture.seed = config.seed;
  if (!perturbation_seed_set) config.perturbation.seed = config.seed;
  if (!roi_set) config.roi = central_roi(config.plane);

  // Constraints between settings are reported against the dependent key.
  auto blame = [&](const std::string& key, const std::string& what) {
    const auto it = key_lines.find(key);
    throw ConfigError(key + ": " + what, it == key_lines.end() ? 0 : it->second, key);
  };
  const OccluderLayer& occ = config.scene.occluders;
  if (occ.density > 0.0 && !(config.capture.altitude > occ.height)) {
    blame("capture.altitude", "must lie above the occluder layer");
  }
  if (!config.roi.fits(config.plane.cols, config.plane.rows)) blame("plane.roi", "must be nonempty and inside the plane raster");
  const Vec2 half = 0.5 * config.scene.ground_extent;
  for (const Target& t : config.scene.targets) {
    if (std::abs(t.center.x()) > half.x() || std::abs(t.center.y()) > half.y()) {
      blame("target.center", "target lies outside the ground extent");
    }
  }
  config.validate();
  return config;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_ini(const SimulationConfig& c) {
  std::ostringstream o;
  o << "[simulation]\nseed = " << c.seed << "\n\n";
  const SceneSpec& s = c.scene;
  o << "[scene]\n"
    << "ground_extent = " << fmt(s.ground_extent) << '\n'
    << "ground_tilt = " << fmt(rad2deg(s.ground_tilt)) << '\n'
    << "texture_base = " << fmt(s.texture.base_intensity) << '\n'
    << "texture_variance = " << fmt(s.texture.variance) << '\n'
    << "texture_spacings =";
  for (double v : s.texture.lattice_spacings) o << ' ' << fmt(v);
  o << "\ntexture_seed = " << s.texture.seed << "\n\n";
  for (const Target& t : s.targets) {
    o << "[target]\ncenter = " << fmt(t.center) << "\nradius = " << fmt(t.radius) << "\nintensity = " << fmt(t.intensity)
      << "\n\n";
  }
  o << "[occluders]\n"
    << "density = " << fmt(s.occluders.density) << '\n'
    << "radius = " << fmt(s.occluders.radius) << '\n'
    << "height = " << fmt(s.occluders.height) << '\n'
    << "intensity_mean = " << fmt(s.occluders.intensity_mean) << '\n'
    << "intensity_variance = " << fmt(s.occluders.intensity_variance) << "\n\n";
  const CaptureSpec& k = c.capture;
  o << "[capture]\n"
    << "rows = " << k.rows << '\n'
    << "cols = " << k.cols << '\n'
    << "aperture_diameter = " << fmt(k.aperture_diameter) << '\n'
    << "altitude = " << fmt(k.altitude) << '\n'
    << "focal_length = " << fmt(k.intrinsics.focal_length_px) << '\n'
    << "principal_point = " << fmt(k.intrinsics.principal_point) << '\n'
    << "image_size = " << k.intrinsics.width << ' ' << k.intrinsics.height << '\n'
    << "pixel_noise = " << fmt(k.pixel_noise_sigma) << "\n\n";
  o << "[perturbation]\n";
  for (PoseParam p : kAllPoseParams) {
    const double v = c.perturbation.sigma[idx(p)];
    o << to_string(p) << " = " << fmt(is_angle(p) ? rad2deg(v) : v) << '\n';
  }
  o << "seed = " << c.perturbation.seed << "\n\n";
  o << "[plane]\n"
    << "z = " << fmt(c.plane.anchor.z()) << '\n'
    << "center = " << fmt(Vec2(c.plane.anchor.x(), c.plane.anchor.y())) << '\n'
    << "extent = " << fmt(c.plane.raster_extent) << '\n'
    << "resolution = " << c.plane.cols << ' ' << c.plane.rows << '\n'
    << "roi = " << c.roi.x << ' ' << c.roi.y << ' ' << c.roi.width << ' ' << c.roi.height << '\n';
  return o.str();
}

}  // namespace aos
