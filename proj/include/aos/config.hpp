#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aos/geometry.hpp"
#include "aos/raster.hpp"
#include "aos/simulate.hpp"

namespace aos {

/// Parse or validation failure. `key` is "section.name" when a setting is to
/// blame; `line` is 1-based, 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {});
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Central half of the plane raster in each direction.
Roi central_roi(const FocalPlane& plane);

/// Everything needed to render a dataset.
struct SimulationConfig {
  std::uint64_t seed = 1;
  SceneSpec scene;
  CaptureSpec capture;
  PerturbationSpec perturbation;
  FocalPlane plane;  ///< reference raster and default refinement plane
  Roi roi;           ///< default objective region on the plane raster

  /// The desk-scale benchmark: 30 views, D = 0.5, 0.3 m / 0.5 degree noise.
  static SimulationConfig benchmark();
  void validate() const;
};

/// INI-style text: [section] headers, `key = value` lines, '#' or ';'
/// comments. Vectors are whitespace separated. Angles are in degrees.
/// Sections: simulation, scene, target (repeatable), occluders, capture,
/// perturbation, plane. Omitted keys keep their benchmark defaults; the
/// texture and perturbation seeds default to the simulation seed and the ROI
/// to the central half of the plane raster.
SimulationConfig parse_config(std::string_view text);
SimulationConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const SimulationConfig& config);

}  // namespace aos
