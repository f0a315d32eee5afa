#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aos {

class InsufficientPixels : public std::runtime_error {
 public:
  explicit InsufficientPixels(std::optional<std::size_t> image_index = std::nullopt);
  std::optional<std::size_t> image_index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

class GridMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned pixel rectangle.
struct Roi {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  static Roi full(int width, int height) { return {0, 0, width, height}; }
  bool fits(int raster_width, int raster_height) const;
  /// Throws std::invalid_argument when empty or out of bounds.
  void validate(int raster_width, int raster_height) const;

  bool operator==(const Roi&) const = default;
};

/// Single-channel float raster with a validity mask. Samples are only
/// meaningful where the mask is set.
class ImageRaster {
 public:
  ImageRaster() = default;
  ImageRaster(int width, int height, float fill = 0.0f, bool valid = true);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  float at(int x, int y) const { return samples_[index(x, y)]; }
  float& at(int x, int y) { return samples_[index(x, y)]; }
  bool valid(int x, int y) const { return mask_[index(x, y)] != 0; }
  void set_valid(int x, int y, bool v) { mask_[index(x, y)] = v ? 1 : 0; }
  void set(int x, int y, float value) {
    samples_[index(x, y)] = value;
    mask_[index(x, y)] = 1;
  }
  void invalidate(int x, int y) {
    samples_[index(x, y)] = 0.0f;
    mask_[index(x, y)] = 0;
  }

  const std::vector<float>& samples() const { return samples_; }
  std::vector<float>& samples() { return samples_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::vector<std::uint8_t>& mask() { return mask_; }

  std::size_t valid_count() const;
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> samples_;
  std::vector<std::uint8_t> mask_;
};

/// Running population variance with a fixed shift (the first sample), so
/// every caller feeding the same values in the same order gets bit-identical
/// results.
class VarianceAccumulator {
 public:
  void add(double v) {
    if (n_ == 0) shift_ = v;
    const double d = v - shift_;
    sum_ += d;
    sum2_ += d * d;
    ++n_;
  }
  std::size_t count() const { return n_; }
  double mean() const { return shift_ + sum_ / static_cast<double>(n_); }
  double variance() const {
    const double n = static_cast<double>(n_);
    const double m = sum_ / n;
    const double v = sum2_ / n - m * m;
    return v > 0.0 ? v : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double shift_ = 0.0;
  double sum_ = 0.0;
  double sum2_ = 0.0;
};

/// Gray-level variance: population variance of valid pixels inside roi.
double glv(const ImageRaster& image, const Roi& roi);
double glv(const ImageRaster& image);

}  // namespace aos
