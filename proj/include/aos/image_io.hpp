#pragma once

#include <filesystem>
#include <stdexcept>

#include "aos/raster.hpp"

namespace aos {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grayscale PFM ("Pf"), little-endian float32, scale -1.0, rows stored bottom-up.
/// Invalid pixels are written as NaN and read back as invalid.
void write_pfm(const std::filesystem::path& path, const ImageRaster& image);
ImageRaster read_pfm(const std::filesystem::path& path);

/// Binary PGM (P5) with maxval up to 65535; 16-bit samples are big-endian.
ImageRaster read_pgm(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, const ImageRaster& image);

/// 8-bit mask: 0 invalid, 255 valid.
void write_mask_pgm(const std::filesystem::path& path, const ImageRaster& image);
void apply_mask_pgm(const std::filesystem::path& path, ImageRaster& image);

/// 8-bit preview with linear min-max normalization over the valid region;
/// invalid pixels are black.
void write_preview_pgm(const std::filesystem::path& path, const ImageRaster& image);

/// Dispatches on extension (.pfm or .pgm). A sibling "<stem>_mask.pgm", when
/// present, is applied as the validity mask.
ImageRaster read_image(const std::filesystem::path& path);

}  // namespace aos
