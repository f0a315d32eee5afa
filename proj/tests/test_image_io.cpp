#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "aos/image_io.hpp"

using namespace aos;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "aos_test_image_io";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<unsigned char> bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageRaster ramp(int w, int h) {
  ImageRaster r(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) r.set(x, y, 0.25f * x + 10.0f * y - 3.0f);
  }
  return r;
}

}  // namespace

TEST_CASE("pfm round trip keeps values and invalid pixels") {
  ImageRaster r = ramp(5, 3);
  r.invalidate(2, 1);
  const fs::path p = scratch("ramp.pfm");
  write_pfm(p, r);
  const ImageRaster back = read_pfm(p);
  REQUIRE(back.width() == 5);
  REQUIRE(back.height() == 3);
  CHECK(back.samples() == r.samples());
  CHECK(back.mask() == r.mask());

  // Header, little-endian scale, rows stored bottom-up.
  const auto data = bytes(p);
  const std::string header(data.begin(), data.begin() + 12);
  CHECK(header == "Pf\n5 3\n-1.0\n");
  float first = 0.0f;
  std::memcpy(&first, data.data() + 12, 4);
  CHECK(first == r.at(0, 2));
}

TEST_CASE("pgm reading in 8 and 16 bit") {
  const fs::path p8 = scratch("small8.pgm");
  {
    std::ofstream out(p8, std::ios::binary);
    out << "P5\n# comment\n3 2\n255\n";
    const unsigned char px[] = {0, 1, 2, 253, 254, 255};
    out.write(reinterpret_cast<const char*>(px), 6);
  }
  const ImageRaster a = read_pgm(p8);
  CHECK(a.width() == 3);
  CHECK(a.at(2, 1) == 255.0f);
  CHECK(a.at(1, 0) == 1.0f);

  ImageRaster r(4, 2);
  for (int i = 0; i < 8; ++i) r.samples()[i] = static_cast<float>(i * 8000);
  const fs::path p16 = scratch("wide.pgm");
  write_pgm16(p16, r);
  const ImageRaster b = read_pgm(p16);
  CHECK(b.samples() == r.samples());
}

TEST_CASE("masks and sidecar masks") {
  ImageRaster image = ramp(4, 4);
  ImageRaster mask_source = image;
  mask_source.invalidate(0, 0);
  mask_source.invalidate(3, 2);
  const fs::path img = scratch("masked.pfm");
  const fs::path mask = scratch("masked_mask.pgm");
  write_pfm(img, image);
  write_mask_pgm(mask, mask_source);
  const ImageRaster loaded = read_image(img);
  CHECK_FALSE(loaded.valid(0, 0));
  CHECK_FALSE(loaded.valid(3, 2));
  CHECK(loaded.valid_count() == 14);

  fs::remove(mask);
  CHECK(read_image(img).valid_count() == 16);
}

TEST_CASE("preview normalization") {
  ImageRaster r(3, 1);
  r.set(0, 0, 10.0f);
  r.set(1, 0, 20.0f);
  r.set(2, 0, 30.0f);
  const fs::path p = scratch("preview.pgm");
  write_preview_pgm(p, r);
  const ImageRaster back = read_pgm(p);
  CHECK(back.at(0, 0) == 0.0f);
  CHECK(back.at(1, 0) == 128.0f);
  CHECK(back.at(2, 0) == 255.0f);

  r.invalidate(2, 0);
  write_preview_pgm(p, r);
  const ImageRaster partial = read_pgm(p);
  CHECK(partial.at(1, 0) == 255.0f);
  CHECK(partial.at(2, 0) == 0.0f);
}

TEST_CASE("malformed files") {
  const fs::path p = scratch("bad.pfm");
  {
    std::ofstream out(p, std::ios::binary);
    out << "PF\n2 2\n-1.0\n";
  }
  CHECK_THROWS_AS(read_pfm(p), ImageIoError);
  {
    std::ofstream out(p, std::ios::binary);
    out << "Pf\n2 2\n-1.0\n";
    const float v = 1.0f;
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  CHECK_THROWS_AS(read_pfm(p), ImageIoError);
  CHECK_THROWS_AS(read_pfm(scratch("missing.pfm")), ImageIoError);
  CHECK_THROWS_AS(read_image(scratch("image.png")), ImageIoError);
}
