#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "aos/simulate.hpp"
#include "support.hpp"

using namespace aos;
using namespace aos::testing;

namespace {

const double kHalfCoverDensity = std::numbers::ln2 / (std::numbers::pi * 0.25);  // r = 0.5

SceneSpec half_occluded_scene() {
  SceneSpec s = clear_scene();
  s.occluders.density = kHalfCoverDensity;
  s.occluders.radius = 0.5;
  s.occluders.height = 10.0;
  s.occluders.intensity_mean = 40.0;
  s.occluders.intensity_variance = 100.0;
  return s;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / (v.size() - 1) / v.size())};
}

RefinementResult unchanged_result(std::span<const PoseParams> poses, double objective) {
  RefinementResult r;
  r.corrected_poses.assign(poses.begin(), poses.end());
  r.included.assign(poses.size(), true);
  r.n_stop = poses.size();
  r.initial_objective = r.final_objective = objective;
  return r;
}

}  // namespace

TEST_CASE("capture grid") {
  const CaptureSpec c = capture_grid(5, 6, 30.0);
  const std::vector<PoseParams> poses = c.poses();
  REQUIRE(poses.size() == 30);
  CHECK(c.spacing() == doctest::Approx(30.0 / std::hypot(5.0, 4.0)));
  // Corner positions lie on the aperture circle.
  for (std::size_t i : {0u, 5u, 24u, 29u}) CHECK(std::hypot(poses[i].t_x, poses[i].t_y) == doctest::Approx(15.0));
  CHECK(poses[0].t_x < 0.0);
  CHECK(poses[0].t_y > 0.0);
  CHECK(poses[1].t_x - poses[0].t_x == doctest::Approx(c.spacing()));
  for (const PoseParams& p : poses) {
    CHECK(p.t_z == 30.0);
    CHECK(p.alpha == 0.0);
  }
  CHECK(capture_grid(1, 1, 30.0).poses()[0] == nadir());
}

TEST_CASE("spec validation") {
  SceneSpec s = clear_scene();
  CHECK_NOTHROW(s.validate());
  s.occluders.density = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = clear_scene();
  s.occluders.radius = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = clear_scene();
  s.targets.push_back({Vec2(45.0, 0.0), 1.0, 200.0});
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  const SceneSpec occluded = half_occluded_scene();
  CaptureSpec low = capture_grid(1, 1, 0.0);
  low.altitude = 8.0;
  CHECK_THROWS_AS(low.validate(occluded), std::invalid_argument);
  CHECK_NOTHROW(low.validate(clear_scene()));

  PerturbationSpec p;
  p.sigma[2] = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("occlusion_probability") {
  CHECK(occlusion_probability(0.0, 0.5) == 0.0);
  CHECK(occlusion_probability(kHalfCoverDensity, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  double previous = 0.0;
  for (double density = 0.05; density < 5.0; density += 0.05) {
    const double p = occlusion_probability(density, 0.5);
    CHECK(p > previous);
    previous = p;
  }
}

TEST_CASE("rendering without occluders shows the ground") {
  const SceneSpec spec = clear_scene();
  const RenderedViews v = render_views(spec, capture_grid(2, 2, 10.0), ground_plane(), 3);
  const Scene scene(spec, 3);
  const CameraIntrinsics K = default_intrinsics();
  REQUIRE(v.images.size() == 4);
  for (std::size_t k = 0; k < v.images.size(); ++k) {
    CHECK(std::count(v.occluded[k].begin(), v.occluded[k].end(), 1) == 0);
    const PoseParams& pose = v.true_poses[k];
    const Mat3 R = camera_to_world(pose);
    // Spot check: each pixel shows the ground where its ray lands.
    for (int j = 5; j < 256; j += 50) {
      for (int i = 7; i < 256; i += 50) {
        const Vec3 ray = R * Vec3((i + 0.5 - K.principal_point.x()) / K.focal_length_px,
                                  (j + 0.5 - K.principal_point.y()) / K.focal_length_px, 1.0);
        const double s = -pose.t_z / ray.z();
        const Vec3 hit = pose.center() + s * ray;
        CHECK(v.images[k].at(i, j) == doctest::Approx(scene.ground_intensity(hit.x(), hit.y())).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("views agree on unoccluded ground points") {
  const FocalPlane plane = ground_plane();
  const RenderedViews v = render_views(clear_scene(), capture_grid(2, 2, 10.0), plane, 3);
  const CameraIntrinsics K = default_intrinsics();
  std::vector<ImageRaster> warped;
  for (std::size_t k = 0; k < 4; ++k) warped.push_back(warp_to_plane(v.images[k], K, v.true_poses[k], plane));
  const Roi roi = center_roi();
  const double range = dynamic_range(v.reference, roi);
  for (std::size_t k = 1; k < 4; ++k) CHECK(mean_abs_diff(warped[0], warped[k], roi) < 0.01 * range);
}

TEST_CASE("rendering is deterministic per seed") {
  const SceneSpec spec = half_occluded_scene();
  CaptureSpec c = capture_grid(1, 2, 4.0, 2.0);
  const RenderedViews a = render_views(spec, c, ground_plane(), 11);
  const RenderedViews b = render_views(spec, c, ground_plane(), 11);
  const RenderedViews d = render_views(spec, c, ground_plane(), 12);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.images[k].samples() == b.images[k].samples());
    CHECK(a.occluded[k] == b.occluded[k]);
    CHECK(a.images[k].samples() != d.images[k].samples());
  }
  CHECK(a.reference.samples() == b.reference.samples());
}

TEST_CASE("occlusion fraction follows the Boolean model") {
  const SceneSpec spec = half_occluded_scene();

  SUBCASE("rendered views") {
    std::vector<double> fractions;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const RenderedViews v = render_views(spec, capture_grid(1, 1, 0.0), ground_plane(), seed);
      double hits = 0;
      for (std::uint8_t o : v.occluded[0]) hits += o;
      fractions.push_back(hits / v.occluded[0].size());
    }
    const MeanSe f = mean_se(fractions);
    CHECK(std::abs(f.mean - 0.5) <= 3 * f.se);
  }

  SUBCASE("ray counting at the occluder layer") {
    std::vector<double> fractions;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const Scene scene(spec, seed);
      int hits = 0;
      const int n = 4000;
      for (int i = 0; i < n; ++i) hits += scene.occluder_at(u(rng), u(rng)).has_value() ? 1 : 0;
      fractions.push_back(static_cast<double>(hits) / n);
    }
    const MeanSe f = mean_se(fractions);
    CHECK(std::abs(f.mean - 0.5) <= 3 * f.se);
    CHECK(std::abs(f.mean - 0.5) < 0.02);
  }
}

TEST_CASE("single-view glv matches the single-view model") {
  const SceneSpec spec = half_occluded_scene();
  const double noise = 2.0;
  const double model = var_single(scene_statistics(spec, noise));
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const RenderedViews v = render_views(spec, capture_grid(2, 2, 10.0, noise), ground_plane(), seed);
    for (const ImageRaster& image : v.images) {
      sum += glv(image);
      ++n;
    }
  }
  CHECK(std::abs(sum / n / model - 1.0) < 0.10);
}

TEST_CASE("perturb_poses") {
  const std::vector<PoseParams> truth(10000, nadir(1.0, -2.0));
  PerturbationSpec spec;
  SUBCASE("zero sigmas") { CHECK(perturb_poses(truth, spec) == truth); }

  spec.sigma = {0.3, 0.3, 0.1, deg2rad(0.5), deg2rad(0.5), deg2rad(0.5)};
  spec.seed = 5;
  const std::vector<PoseParams> noisy = perturb_poses(truth, spec);

  SUBCASE("statistics of the injected error") {
    for (PoseParam p : kAllPoseParams) {
      std::vector<double> err;
      for (std::size_t i = 0; i < truth.size(); ++i) err.push_back(component(noisy[i], p) - component(truth[i], p));
      const MeanSe e = mean_se(err);
      const double sigma = spec.sigma[static_cast<std::size_t>(p)];
      CHECK(std::abs(e.mean) <= 3 * e.se);
      CHECK(e.se * std::sqrt(static_cast<double>(err.size())) == doctest::Approx(sigma).epsilon(0.03));
    }
  }

  SUBCASE("deterministic per seed") {
    CHECK(perturb_poses(truth, spec) == noisy);
    PerturbationSpec other = spec;
    other.seed = 6;
    CHECK(perturb_poses(truth, other) != noisy);
  }
}

TEST_CASE("aligned_position_error") {
  const std::vector<PoseParams> truth = capture_grid(3, 3, 10.0).poses();
  std::vector<PoseParams> moved = truth;
  const double c = std::cos(0.3), s = std::sin(0.3);
  for (PoseParams& p : moved) {
    const double x = p.t_x, y = p.t_y;
    p.t_x = c * x - s * y + 4.0;
    p.t_y = s * x + c * y - 1.0;
  }
  CHECK(aligned_position_error(moved, truth) < 1e-9);

  // One view off by 0.9 m: the optimal fit spreads the residual.
  std::vector<PoseParams> off = truth;
  off[4].t_x += 0.9;
  const double e = aligned_position_error(off, truth);
  CHECK(e > 0.0);
  CHECK(e < 0.9 / 9 * 2);
}

TEST_CASE("evaluate") {
  const std::vector<PoseParams> truth = capture_grid(2, 3, 10.0).poses();
  const ImageRaster reference(8, 8, 4.0f);
  ImageRaster ramp(8, 8);
  for (int i = 0; i < 64; ++i) ramp.samples()[i] = static_cast<float>(i);
  const Roi roi = Roi::full(8, 8);

  SUBCASE("truth against truth") {
    const RefinementResult r = unchanged_result(truth, 10.0);
    const EvaluationMetrics m = evaluate(r, truth, truth, ramp, ramp, roi);
    for (double v : m.rmse_before) CHECK(v == 0.0);
    for (double v : m.rmse_after) CHECK(v == 0.0);
    CHECK(m.aligned_error_before == doctest::Approx(0.0));
    CHECK(m.gain_percent == 0.0);
    CHECK(m.psnr_db == kPsnrCap);
    CHECK(m.baseline_parameters == 36);
  }

  SUBCASE("constant t_x offset") {
    std::vector<PoseParams> initial = truth;
    for (PoseParams& p : initial) p.t_x += 0.3;
    RefinementResult r = unchanged_result(truth, 10.0);
    r.final_objective = 12.5;
    r.parameter_evaluations = 15;
    const EvaluationMetrics m = evaluate_poses(r, initial, truth);
    CHECK(m.rmse_before[0] == doctest::Approx(0.3));
    for (std::size_t k = 1; k < 6; ++k) CHECK(m.rmse_before[k] == 0.0);
    // A common shift is a gauge freedom, not a registration error.
    CHECK(m.aligned_error_before == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.gain_percent == doctest::Approx(25.0));
    CHECK(m.parameter_reduction_percent == doctest::Approx(100.0 * (1.0 - 15.0 / 36.0)));
  }

  SUBCASE("angle errors wrap") {
    std::vector<PoseParams> initial = truth;
    std::vector<PoseParams> wrapped = truth;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      initial[i].gamma += deg2rad(1.0);
      wrapped[i].gamma += 2.0 * std::numbers::pi;
    }
    const RefinementResult r = unchanged_result(wrapped, 1.0);
    const EvaluationMetrics m = evaluate_poses(r, initial, truth);
    CHECK(m.rmse_before[5] == doctest::Approx(deg2rad(1.0)));
    CHECK(m.rmse_after[5] == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("psnr") {
    ImageRaster off = ramp;
    off.samples()[10] += 1.0f;
    const double expected = 10.0 * std::log10(63.0 * 63.0 / (1.0 / 64.0));
    CHECK(psnr(off, ramp, roi) == doctest::Approx(expected));
    CHECK(psnr(reference, reference, roi) == kPsnrCap);
    CHECK_THROWS_AS(psnr(ImageRaster(4, 4), ramp, roi), GridMismatch);
  }
}

TEST_CASE("scene statistics") {
  const SceneSpec spec = half_occluded_scene();
  const OcclusionStats s = scene_statistics(spec, 2.0);
  CHECK(s.D == doctest::Approx(0.5));
  CHECK(s.mu_o == 40.0);
  CHECK(s.sigma2_o == 104.0);
  CHECK(s.mu_s == 100.0);
  CHECK(s.sigma2_s == 404.0);
  CHECK(scene_statistics(clear_scene(), 0.0).D == 0.0);
}
