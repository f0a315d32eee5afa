#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aos/geometry.hpp"
#include "aos/raster.hpp"

namespace aos {

enum class Interpolation { Bilinear, Nearest };

/// Samples a source image at plane raster coordinates through the
/// plane-induced homography. Construction throws DegenerateView.
class PlaneSampler {
 public:
  PlaneSampler(const ImageRaster& image, const CameraIntrinsics& K, const PoseParams& pose, const FocalPlane& plane,
               Interpolation interpolation = Interpolation::Bilinear);

  /// Value at the center of plane pixel (col, row), or nullopt when the ray
  /// misses the image, lands on invalid pixels or the point is behind the camera.
  std::optional<float> sample(int col, int row) const;

  const Mat3& homography() const { return H_; }

 private:
  const ImageRaster& image_;
  Mat3 H_;
  Interpolation interpolation_;
};

/// Resamples `image` onto the plane raster grid.
ImageRaster warp_to_plane(const ImageRaster& image, const CameraIntrinsics& K, const PoseParams& pose,
                          const FocalPlane& plane, Interpolation interpolation = Interpolation::Bilinear);

/// Running integral over registered images. Sum and count are kept per
/// pixel; the integral is defined only where at least one image contributed.
/// Single writer; copies are cheap snapshots.
class IntegralAccumulator {
 public:
  IntegralAccumulator() = default;
  IntegralAccumulator(int cols, int rows, const Roi& objective_roi);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  const Roi& roi() const { return roi_; }
  int N() const { return static_cast<int>(order_.size()); }
  bool empty() const { return order_.empty(); }

  /// Adds the valid pixels of `warped`, records `source_index` and appends
  /// the normalized variance over the objective roi (NaN when undefined).
  /// Throws GridMismatch when the raster size differs.
  void accumulate(const ImageRaster& warped, std::size_t source_index);

  ImageRaster integral() const;

  const std::vector<double>& sum() const { return sum_; }
  const std::vector<unsigned>& count() const { return count_; }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<double>& objective_trace() const { return trace_; }

 private:
  int cols_ = 0;
  int rows_ = 0;
  Roi roi_;
  std::vector<double> sum_;
  std::vector<unsigned> count_;
  std::vector<std::size_t> order_;
  std::vector<double> trace_;
};

/// N * glv(integral(acc), roi).
double normalized_variance(const IntegralAccumulator& acc, const Roi& roi);

/// Normalized variance the accumulator would have after integrating the
/// image seen through `candidate`, evaluated without modifying `acc`.
/// Throws InsufficientPixels.
double candidate_normalized_variance(const IntegralAccumulator& acc, const PlaneSampler& candidate, const Roi& roi);

/// Indices ordered by non-increasing glv; ties keep the original order.
/// Throws InsufficientPixels carrying the offending index.
std::vector<std::size_t> sort_by_glv(std::span<const ImageRaster> images, const Roi& roi);
std::vector<std::size_t> sort_by_values(std::span<const double> values);

}  // namespace aos
