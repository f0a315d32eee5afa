#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "aos/geometry.hpp"
#include "aos/raster.hpp"
#include "aos/simulate.hpp"

namespace aos::testing {

inline CameraIntrinsics default_intrinsics() { return {200.0, Vec2(128.0, 128.0), 256, 256}; }

/// 25.6 m ground raster at 0.1 m per pixel, centered on the origin.
inline FocalPlane ground_plane(double z = 0.0) {
  return FocalPlane::horizontal(z, Vec2::Zero(), Vec2(25.6, 25.6), 256, 256);
}

inline Roi center_roi() { return Roi{64, 64, 128, 128}; }

/// Textured ground without occluders.
inline SceneSpec clear_scene(std::uint64_t texture_seed = 3) {
  SceneSpec s;
  s.texture.seed = texture_seed;
  return s;
}

inline CaptureSpec capture_grid(int rows, int cols, double diameter, double noise = 0.0) {
  CaptureSpec c;
  c.rows = rows;
  c.cols = cols;
  c.aperture_diameter = diameter;
  c.pixel_noise_sigma = noise;
  return c;
}

inline PoseParams nadir(double x = 0.0, double y = 0.0, double z = 30.0) {
  PoseParams p;
  p.t_x = x;
  p.t_y = y;
  p.t_z = z;
  return p;
}

/// Mean absolute difference over pixels valid in both rasters inside roi.
inline double mean_abs_diff(const ImageRaster& a, const ImageRaster& b, const Roi& roi) {
  double sum = 0.0;
  long n = 0;
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      if (!a.valid(x, y) || !b.valid(x, y)) continue;
      sum += std::abs(static_cast<double>(a.at(x, y)) - b.at(x, y));
      ++n;
    }
  }
  return n > 0 ? sum / n : NAN;
}

inline double dynamic_range(const ImageRaster& r, const Roi& roi) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      if (!r.valid(x, y)) continue;
      lo = std::min(lo, static_cast<double>(r.at(x, y)));
      hi = std::max(hi, static_cast<double>(r.at(x, y)));
    }
  }
  return hi - lo;
}

}  // namespace aos::testing
