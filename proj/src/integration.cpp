#include "aos/integration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aos {

PlaneSampler::PlaneSampler(const ImageRaster& image, const CameraIntrinsics& K, const PoseParams& pose,
                           const FocalPlane& plane, Interpolation interpolation)
    : image_(image), H_(homography_to_plane(K, pose, plane)), interpolation_(interpolation) {}

std::optional<float> PlaneSampler::sample(int col, int row) const {
  const double c = col + 0.5;
  const double r = row + 0.5;
  const double w = H_(2, 0) * c + H_(2, 1) * r + H_(2, 2);
  if (!(w > 0.0)) return std::nullopt;
  // Continuous pixel coordinates with pixel centers on integers.
  const double x = (H_(0, 0) * c + H_(0, 1) * r + H_(0, 2)) / w - 0.5;
  const double y = (H_(1, 0) * c + H_(1, 1) * r + H_(1, 2)) / w - 0.5;
  const int W = image_.width();
  const int Hh = image_.height();

  if (interpolation_ == Interpolation::Nearest) {
    if (!(x >= -0.5 && x < W - 0.5 && y >= -0.5 && y < Hh - 0.5)) return std::nullopt;
    const int xi = static_cast<int>(std::floor(x + 0.5));
    const int yi = static_cast<int>(std::floor(y + 0.5));
    if (!image_.valid(xi, yi)) return std::nullopt;
    return image_.at(xi, yi);
  }

  if (!(x >= 0.0 && x <= W - 1 && y >= 0.0 && y <= Hh - 1)) return std::nullopt;
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  int x1 = std::min(x0 + 1, W - 1);
  int y1 = std::min(y0 + 1, Hh - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const std::size_t i00 = image_.index(x0, y0);
  const std::size_t i10 = image_.index(x1, y0);
  const std::size_t i01 = image_.index(x0, y1);
  const std::size_t i11 = image_.index(x1, y1);
  const auto& m = image_.mask();
  if (!(m[i00] && m[i10] && m[i01] && m[i11])) return std::nullopt;
  const auto& s = image_.samples();
  const double top = s[i00] + fx * (s[i10] - s[i00]);
  const double bottom = s[i01] + fx * (s[i11] - s[i01]);
  return static_cast<float>(top + fy * (bottom - top));
}

ImageRaster warp_to_plane(const ImageRaster& image, const CameraIntrinsics& K, const PoseParams& pose,
                          const FocalPlane& plane, Interpolation interpolation) {
  const PlaneSampler sampler(image, K, pose, plane, interpolation);
  ImageRaster out(plane.cols, plane.rows, 0.0f, false);
  for (int row = 0; row < plane.rows; ++row) {
    for (int col = 0; col < plane.cols; ++col) {
      if (const auto v = sampler.sample(col, row)) out.set(col, row, *v);
    }
  }
  return out;
}

IntegralAccumulator::IntegralAccumulator(int cols, int rows, const Roi& objective_roi)
    : cols_(cols),
      rows_(rows),
      roi_(objective_roi),
      sum_(static_cast<std::size_t>(cols) * rows, 0.0),
      count_(sum_.size(), 0u) {
  roi_.validate(cols, rows);
}

void IntegralAccumulator::accumulate(const ImageRaster& warped, std::size_t source_index) {
  if (warped.width() != cols_ || warped.height() != rows_) {
    throw GridMismatch("warped raster does not match the accumulator grid");
  }
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    if (!warped.mask()[i]) continue;
    sum_[i] += static_cast<double>(warped.samples()[i]);
    count_[i] += 1;
  }
  order_.push_back(source_index);
  try {
    trace_.push_back(normalized_variance(*this, roi_));
  } catch (const InsufficientPixels&) {
    trace_.push_back(std::numeric_limits<double>::quiet_NaN());
  }
}

ImageRaster IntegralAccumulator::integral() const {
  ImageRaster out(cols_, rows_, 0.0f, false);
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    if (count_[i] == 0) continue;
    out.samples()[i] = static_cast<float>(sum_[i] / count_[i]);
    out.mask()[i] = 1;
  }
  return out;
}

double normalized_variance(const IntegralAccumulator& acc, const Roi& roi) {
  roi.validate(acc.cols(), acc.rows());
  // Integral values stay in double here so this matches the candidate path bit for bit.
  VarianceAccumulator var;
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * acc.cols() + x;
      if (acc.count()[i] > 0) var.add(acc.sum()[i] / acc.count()[i]);
    }
  }
  if (var.count() < 2) throw InsufficientPixels();
  return acc.N() * var.variance();
}

double candidate_normalized_variance(const IntegralAccumulator& acc, const PlaneSampler& candidate, const Roi& roi) {
  roi.validate(acc.cols(), acc.rows());
  VarianceAccumulator var;
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * acc.cols() + x;
      double s = acc.sum()[i];
      unsigned c = acc.count()[i];
      if (const auto v = candidate.sample(x, y)) {
        s += static_cast<double>(*v);
        c += 1;
      }
      if (c > 0) var.add(s / c);
    }
  }
  if (var.count() < 2) throw InsufficientPixels();
  return (acc.N() + 1) * var.variance();
}

std::vector<std::size_t> sort_by_values(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

std::vector<std::size_t> sort_by_glv(std::span<const ImageRaster> images, const Roi& roi) {
  std::vector<double> values(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    try {
      values[i] = glv(images[i], roi);
    } catch (const InsufficientPixels&) {
      throw InsufficientPixels(i);
    }
  }
  return sort_by_values(values);
}

}  // namespace aos
