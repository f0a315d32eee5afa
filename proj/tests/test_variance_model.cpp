#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "aos/variance_model.hpp"

using namespace aos;

namespace {

const OcclusionStats kRunning{0.5, 0.0, 1.0, 10.0, 4.0};

// Second moment of the mean of N views: own terms E[X_i^2] and cross terms
// E[X_i X_j], i != j, where views share the signal value but not occluders.
double second_moment_oracle(const OcclusionStats& s, int N) {
  const double own = s.D * (s.sigma2_o + s.mu_o * s.mu_o) + (1 - s.D) * (s.sigma2_s + s.mu_s * s.mu_s);
  const double cross = s.D * s.D * s.mu_o * s.mu_o + 2 * s.D * (1 - s.D) * s.mu_o * s.mu_s +
                       (1 - s.D) * (1 - s.D) * (s.sigma2_s + s.mu_s * s.mu_s);
  return (N * own + N * (N - 1.0) * cross) / (static_cast<double>(N) * N);
}

}  // namespace

TEST_CASE("var_single") {
  OcclusionStats s = kRunning;
  s.D = 0.0;
  CHECK(var_single(s) == doctest::Approx(4.0));
  s.D = 1.0;
  CHECK(var_single(s) == doctest::Approx(1.0));
  CHECK(var_single(kRunning) == doctest::Approx(27.5));
}

TEST_CASE("var_integral") {
  CHECK(var_integral(kRunning, 10) == doctest::Approx(3.65).epsilon(1e-14));
  CHECK(var_integral(kRunning, 1) == var_single(kRunning));
  OcclusionStats clear = kRunning;
  clear.D = 0.0;
  for (int N : {1, 2, 7, 100}) CHECK(var_integral(clear, N) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(var_integral(kRunning, 0), std::invalid_argument);
}

TEST_CASE("substitution identity for random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const OcclusionStats s{u(rng), 200 * u(rng) - 100, 50 * u(rng), 200 * u(rng) - 100, 50 * u(rng)};
    const int N = 1 + static_cast<int>(u(rng) * 100);
    const double expected = var_single(s) / N + (1 - s.D) * (1 - s.D) * (1 - 1.0 / N) * s.sigma2_s;
    const double got = var_integral(s, N);
    CHECK(std::abs(got - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("var_integral decreases with N when only occluders add variance") {
  const OcclusionStats s{0.4, 10.0, 9.0, 10.0, 1.0};
  double previous = var_integral(s, 1);
  for (int N = 2; N <= 60; ++N) {
    const double v = var_integral(s, N);
    CHECK(v <= previous);
    previous = v;
  }
}

TEST_CASE("model_moments") {
  const ModelMoments m = model_moments(kRunning, 10);
  CHECK(m.mean == doctest::Approx(5.0));
  CHECK(m.second_moment == doctest::Approx(28.65).epsilon(1e-12));
  CHECK(m.variance == doctest::Approx(3.65).epsilon(1e-12));
  CHECK(std::abs(m.variance - (m.second_moment - m.mean * m.mean)) <= 1e-9 * m.variance);

  OcclusionStats clear = kRunning;
  clear.D = 0.0;
  CHECK(model_moments(clear, 3).mean == doctest::Approx(10.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const OcclusionStats s{u(rng), 20 * u(rng), 5 * u(rng), 20 * u(rng), 5 * u(rng)};
    const int N = 1 + static_cast<int>(u(rng) * 50);
    const ModelMoments mm = model_moments(s, N);
    CHECK(mm.second_moment == doctest::Approx(second_moment_oracle(s, N)).epsilon(1e-12));
    CHECK(mm.variance == doctest::Approx(var_integral(s, N)).epsilon(1e-9));
  }
}

TEST_CASE("stats validation") {
  CHECK_NOTHROW(kRunning.validate());
  CHECK_THROWS_AS((OcclusionStats{1.5, 0, 1, 0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((OcclusionStats{0.5, 0, -1, 0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((OcclusionStats{0.5, 0, 1, 0, -1}.validate()), std::invalid_argument);
}

TEST_CASE("monte_carlo_integral") {
  SUBCASE("noise-free signal gives a constant integral") {
    const MonteCarloEstimate e = monte_carlo_integral(OcclusionStats{0.0, 3.0, 2.0, 7.0, 0.0}, 5, 10000, 1);
    CHECK(e.moments.mean == 7.0);
    CHECK(e.moments.variance == 0.0);
  }

  SUBCASE("running example converges to the closed form") {
    const MonteCarloEstimate e = monte_carlo_integral(kRunning, 10, 1000000, 42);
    const double model = var_integral(kRunning, 10);
    CHECK(e.num_pixels == 1000000);
    CHECK(std::abs(e.moments.variance - model) <= 3 * e.variance_standard_error);
    CHECK(std::abs(e.moments.variance - model) <= 0.02 * model);
    CHECK(std::abs(e.moments.mean - 5.0) <= 3 * e.mean_standard_error);
  }

  SUBCASE("deterministic and independent of the worker count") {
    const MonteCarloEstimate a = monte_carlo_integral(kRunning, 4, 200000, 9, 1);
    const MonteCarloEstimate b = monte_carlo_integral(kRunning, 4, 200000, 9, 3);
    const MonteCarloEstimate c = monte_carlo_integral(kRunning, 4, 200000, 9);
    CHECK(a.moments.mean == b.moments.mean);
    CHECK(a.moments.variance == b.moments.variance);
    CHECK(a.moments.variance == c.moments.variance);
    const MonteCarloEstimate d = monte_carlo_integral(kRunning, 4, 200000, 10);
    CHECK(a.moments.variance != d.moments.variance);
  }

  SUBCASE("full occlusion averages independent occluders") {
    const MonteCarloEstimate e = monte_carlo_integral(OcclusionStats{1.0, 2.0, 9.0, 50.0, 4.0}, 9, 400000, 3);
    CHECK(std::abs(e.moments.variance - 1.0) <= 3 * e.variance_standard_error);
  }

  CHECK_THROWS_AS(monte_carlo_integral(kRunning, 0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(monte_carlo_integral(kRunning, 2, 1, 1), std::invalid_argument);
}
