#include "aos/raster.hpp"

#include <algorithm>

namespace aos {

InsufficientPixels::InsufficientPixels(std::optional<std::size_t> image_index)
    : std::runtime_error(image_index ? "fewer than 2 valid pixels in region (image " + std::to_string(*image_index) + ")"
                                     : "fewer than 2 valid pixels in region"),
      index_(image_index) {}

bool Roi::fits(int raster_width, int raster_height) const {
  return width > 0 && height > 0 && x >= 0 && y >= 0 && x + width <= raster_width && y + height <= raster_height;
}

void Roi::validate(int raster_width, int raster_height) const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("region of interest is empty");
  if (!fits(raster_width, raster_height)) throw std::invalid_argument("region of interest exceeds raster bounds");
}

ImageRaster::ImageRaster(int width, int height, float fill, bool valid)
    : width_(width),
      height_(height),
      samples_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill),
      mask_(samples_.size(), valid ? 1 : 0) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative raster size");
}

std::size_t ImageRaster::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

double glv(const ImageRaster& image, const Roi& roi) {
  roi.validate(image.width(), image.height());
  VarianceAccumulator acc;
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      if (image.valid(x, y)) acc.add(image.at(x, y));
    }
  }
  if (acc.count() < 2) throw InsufficientPixels();
  return acc.variance();
}

double glv(const ImageRaster& image) { return glv(image, Roi::full(image.width(), image.height())); }

}  // namespace aos
