#include "aos/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace aos {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot write " + path.string());
  return out;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) return token;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (token.empty()) throw ImageIoError("truncated header in " + path.string());
  return token;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string token = header_token(in, path);
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw ImageIoError("malformed header value '" + token + "' in " + path.string());
  }
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const ImageRaster& image) {
  auto out = open_out(path);
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  std::vector<std::uint32_t> row(static_cast<std::size_t>(image.width()));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      const float v = image.valid(x, y) ? image.at(x, y) : nan;
      row[static_cast<std::size_t>(x)] = to_little(std::bit_cast<std::uint32_t>(v));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw ImageIoError("failed writing " + path.string());
}

ImageRaster read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (header_token(in, path) != "Pf") throw ImageIoError(path.string() + " is not a grayscale PFM");
  const int width = header_int(in, path);
  const int height = header_int(in, path);
  const std::string scale_token = header_token(in, path);
  double scale = 0.0;
  try {
    scale = std::stod(scale_token);
  } catch (const std::exception&) {
    throw ImageIoError("malformed PFM scale in " + path.string());
  }
  if (width <= 0 || height <= 0 || scale == 0.0) throw ImageIoError("bad PFM header in " + path.string());
  const bool little = scale < 0.0;

  ImageRaster image(width, height);
  std::vector<std::uint32_t> row(static_cast<std::size_t>(width));
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!in) throw ImageIoError("truncated PFM data in " + path.string());
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits = row[static_cast<std::size_t>(x)];
      if (little != (std::endian::native == std::endian::little)) bits = __builtin_bswap32(bits);
      const float v = std::bit_cast<float>(bits);
      if (std::isfinite(v)) {
        image.set(x, y, v);
      } else {
        image.invalidate(x, y);
      }
    }
  }
  return image;
}

ImageRaster read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (header_token(in, path) != "P5") throw ImageIoError(path.string() + " is not a binary PGM");
  const int width = header_int(in, path);
  const int height = header_int(in, path);
  const int maxval = header_int(in, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw ImageIoError("bad PGM header in " + path.string());
  }
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> data(static_cast<std::size_t>(width) * height * bytes);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!in) throw ImageIoError("truncated PGM data in " + path.string());

  ImageRaster image(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const unsigned v = bytes == 1 ? data[i] : (static_cast<unsigned>(data[2 * i]) << 8) | data[2 * i + 1];
      image.set(x, y, static_cast<float>(v));
    }
  }
  return image;
}

void write_pgm16(const std::filesystem::path& path, const ImageRaster& image) {
  auto out = open_out(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n65535\n";
  std::vector<unsigned char> data;
  data.reserve(image.size() * 2);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const float v = image.valid(x, y) ? image.at(x, y) : 0.0f;
      const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0f, 65535.0f)));
      data.push_back(static_cast<unsigned char>(q >> 8));
      data.push_back(static_cast<unsigned char>(q & 0xff));
    }
  }
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw ImageIoError("failed writing " + path.string());
}

void write_mask_pgm(const std::filesystem::path& path, const ImageRaster& image) {
  auto out = open_out(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> data(image.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = image.mask()[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw ImageIoError("failed writing " + path.string());
}

void apply_mask_pgm(const std::filesystem::path& path, ImageRaster& image) {
  const ImageRaster mask = read_pgm(path);
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw ImageIoError("mask size does not match image: " + path.string());
  }
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask.at(x, y) == 0.0f) image.invalidate(x, y);
    }
  }
}

void write_preview_pgm(const std::filesystem::path& path, const ImageRaster& image) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -lo;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!image.mask()[i]) continue;
    lo = std::min(lo, image.samples()[i]);
    hi = std::max(hi, image.samples()[i]);
  }
  const float range = hi > lo ? hi - lo : 1.0f;
  auto out = open_out(path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> data(image.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!image.mask()[i]) continue;
    const float t = (image.samples()[i] - lo) / range;
    data[i] = static_cast<unsigned char>(std::lround(std::clamp(t, 0.0f, 1.0f) * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw ImageIoError("failed writing " + path.string());
}

ImageRaster read_image(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  ImageRaster image;
  if (ext == ".pfm") {
    image = read_pfm(path);
  } else if (ext == ".pgm") {
    image = read_pgm(path);
  } else {
    throw ImageIoError("unsupported image format: " + path.string());
  }
  const auto mask = path.parent_path() / (path.stem().string() + "_mask.pgm");
  if (std::filesystem::exists(mask)) apply_mask_pgm(mask, image);
  return image;
}

}  // namespace aos
