#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "aos/raster.hpp"

using namespace aos;

TEST_CASE("roi validation") {
  CHECK(Roi::full(8, 4) == Roi{0, 0, 8, 4});
  CHECK(Roi{2, 1, 4, 3}.fits(8, 4));
  CHECK_FALSE(Roi{6, 0, 4, 2}.fits(8, 4));
  CHECK_FALSE(Roi{0, 0, 0, 2}.fits(8, 4));
  CHECK_FALSE(Roi{-1, 0, 2, 2}.fits(8, 4));
  CHECK_THROWS_AS(Roi({0, 0, 9, 1}).validate(8, 4), std::invalid_argument);
}

TEST_CASE("image raster mask bookkeeping") {
  ImageRaster r(3, 2, 5.0f);
  CHECK(r.valid_count() == 6);
  r.invalidate(1, 1);
  CHECK_FALSE(r.valid(1, 1));
  CHECK(r.valid_count() == 5);
  r.set(1, 1, 7.0f);
  CHECK(r.valid(1, 1));
  CHECK(r.at(1, 1) == 7.0f);
  CHECK(r.index(2, 1) == 5);
  const ImageRaster empty(2, 2, 0.0f, false);
  CHECK(empty.valid_count() == 0);
}

TEST_CASE("glv") {
  SUBCASE("constant raster") { CHECK(glv(ImageRaster(5, 5, 3.0f)) == 0.0); }

  SUBCASE("half zeros, half tens") {
    ImageRaster r(4, 4, 0.0f);
    for (int y = 0; y < 2; ++y) {
      for (int x = 0; x < 4; ++x) r.set(x, y, 10.0f);
    }
    CHECK(glv(r) == doctest::Approx(25.0));
  }

  SUBCASE("permutation invariance and scale law") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<float> u(0.0f, 100.0f);
    ImageRaster r(16, 16);
    for (float& v : r.samples()) v = u(rng);
    const double base = glv(r);
    ImageRaster shuffled = r;
    std::shuffle(shuffled.samples().begin(), shuffled.samples().end(), rng);
    CHECK(glv(shuffled) == doctest::Approx(base).epsilon(1e-9));
    for (float s : {0.5f, 2.0f, 10.0f}) {
      ImageRaster scaled = r;
      for (float& v : scaled.samples()) v *= s;
      CHECK(glv(scaled) == doctest::Approx(base * s * s).epsilon(1e-6));
    }
  }

  SUBCASE("only valid pixels inside the roi count") {
    ImageRaster r(4, 4, 100.0f);
    r.set(1, 1, 0.0f);
    r.set(2, 1, 10.0f);
    r.invalidate(1, 2);
    r.set(2, 2, 10.0f);
    // roi covers (1..2, 1..2): values 0, 10, 10 plus one invalid
    const double mean = 20.0 / 3.0;
    const double expected = ((0 - mean) * (0 - mean) + 2 * (10 - mean) * (10 - mean)) / 3.0;
    CHECK(glv(r, Roi{1, 1, 2, 2}) == doctest::Approx(expected));
  }

  SUBCASE("fewer than two valid pixels") {
    ImageRaster r(3, 3, 1.0f, false);
    r.set(0, 0, 2.0f);
    CHECK_THROWS_AS(glv(r), InsufficientPixels);
    CHECK_THROWS_AS(glv(ImageRaster(3, 3), Roi{0, 0, 4, 1}), std::invalid_argument);
  }
}

TEST_CASE("variance accumulator matches a two-pass variance") {
  std::mt19937 rng(1);
  std::normal_distribution<double> n(1e4, 3.0);
  std::vector<double> values(5000);
  for (double& v : values) v = n(rng);
  VarianceAccumulator acc;
  for (double v : values) acc.add(v);
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  CHECK(acc.count() == values.size());
  CHECK(acc.mean() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(acc.variance() == doctest::Approx(ss / values.size()).epsilon(1e-9));
}
