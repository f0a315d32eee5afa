#include "aos/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace aos {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

enum Purpose : std::uint64_t { kTexture = 1, kOccluders = 2, kPixelNoise = 3, kPoseNoise = 4 };

// Mean over a cell of the summed squared bilinear weights is (2/3)^2.
constexpr double kBilinearVarianceFactor = 4.0 / 9.0;

}  // namespace

void SceneSpec::validate() const {
  if (!(ground_extent.x() > 0.0 && ground_extent.y() > 0.0)) throw std::invalid_argument("ground extent must be positive");
  if (!(texture.variance >= 0.0)) throw std::invalid_argument("texture variance must be non-negative");
  if (texture.lattice_spacings.empty() && texture.variance > 0.0) {
    throw std::invalid_argument("texture variance needs at least one lattice spacing");
  }
  for (double s : texture.lattice_spacings) {
    if (!(s > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
  }
  if (!(occluders.density >= 0.0)) throw std::invalid_argument("occluder density must be non-negative");
  if (!(occluders.radius > 0.0)) throw std::invalid_argument("occluder radius must be positive");
  if (!(occluders.intensity_variance >= 0.0)) throw std::invalid_argument("occluder variance must be non-negative");
  for (const Target& t : targets) {
    if (!(t.radius > 0.0)) throw std::invalid_argument("target radius must be positive");
    if (std::abs(t.center.x()) > 0.5 * ground_extent.x() || std::abs(t.center.y()) > 0.5 * ground_extent.y()) {
      throw std::invalid_argument("target lies outside the ground extent");
    }
  }
}

void CaptureSpec::validate(const SceneSpec& scene) const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("capture grid must be at least 1x1");
  if (!(aperture_diameter >= 0.0)) throw std::invalid_argument("aperture diameter must be non-negative");
  intrinsics.validate();
  if (!(pixel_noise_sigma >= 0.0)) throw std::invalid_argument("pixel noise must be non-negative");
  const double top = scene.occluders.density > 0.0 ? scene.occluders.height : 0.0;
  if (!(altitude > top)) throw std::invalid_argument("altitude must lie above the occluder layer");
}

double CaptureSpec::spacing() const {
  const double diagonal = std::hypot(cols - 1, rows - 1);
  return diagonal > 0.0 ? aperture_diameter / diagonal : 0.0;
}

std::vector<PoseParams> CaptureSpec::poses() const {
  const double s = spacing();
  std::vector<PoseParams> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      PoseParams p;
      p.t_x = (c - 0.5 * (cols - 1)) * s;
      p.t_y = (0.5 * (rows - 1) - r) * s;
      p.t_z = altitude;
      out.push_back(p);
    }
  }
  return out;
}

void PerturbationSpec::validate() const {
  for (PoseParam p : kAllPoseParams) {
    if (!(sigma[static_cast<std::size_t>(p)] >= 0.0)) {
      throw std::invalid_argument("perturbation sigma for " + std::string(to_string(p)) + " must be non-negative");
    }
  }
}

double occlusion_probability(double density, double radius) {
  if (density < 0.0) throw std::invalid_argument("density must be non-negative");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  return -std::expm1(-density * kPi * radius * radius);
}

Scene::Scene(const SceneSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  const Vec2 half = 0.5 * spec_.ground_extent;

  const auto& spacings = spec_.texture.lattice_spacings;
  for (std::size_t k = 0; k < spacings.size(); ++k) {
    Lattice lat;
    lat.spacing = spacings[k];
    lat.sigma = std::sqrt(spec_.texture.variance / spacings.size() / kBilinearVarianceFactor);
    lat.nx = static_cast<int>(std::ceil(spec_.ground_extent.x() / lat.spacing)) + 2;
    lat.ny = static_cast<int>(std::ceil(spec_.ground_extent.y() / lat.spacing)) + 2;
    auto rng = make_rng(spec_.texture.seed, k, kTexture);
    std::normal_distribution<double> normal(0.0, 1.0);
    lat.values.resize(static_cast<std::size_t>(lat.nx) * lat.ny);
    for (double& v : lat.values) v = lat.sigma * normal(rng);
    lattices_.push_back(std::move(lat));
  }

  const OccluderLayer& occ = spec_.occluders;
  if (occ.density > 0.0) {
    auto rng = make_rng(seed, 0, kOccluders);
    std::poisson_distribution<long> count(occ.density * spec_.ground_extent.x() * spec_.ground_extent.y());
    std::uniform_real_distribution<double> ux(-half.x(), half.x());
    std::uniform_real_distribution<double> uy(-half.y(), half.y());
    std::normal_distribution<double> value(occ.intensity_mean, std::sqrt(occ.intensity_variance));
    const long n = count(rng);
    disks_.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      const double x = ux(rng);
      const double y = uy(rng);
      disks_.push_back({x, y, value(rng)});
    }

    cell_ = std::max(occ.radius, 0.25);
    grid_nx_ = static_cast<int>(std::ceil(spec_.ground_extent.x() / cell_)) + 1;
    grid_ny_ = static_cast<int>(std::ceil(spec_.ground_extent.y() / cell_)) + 1;
    grid_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
    for (std::uint32_t i = 0; i < disks_.size(); ++i) {
      const int cx = std::clamp(static_cast<int>((disks_[i].x + half.x()) / cell_), 0, grid_nx_ - 1);
      const int cy = std::clamp(static_cast<int>((disks_[i].y + half.y()) / cell_), 0, grid_ny_ - 1);
      grid_[static_cast<std::size_t>(cy) * grid_nx_ + cx].push_back(i);
    }
  }
}

double Scene::texture(double x, double y) const {
  const Vec2 half = 0.5 * spec_.ground_extent;
  if (std::abs(x) > half.x() || std::abs(y) > half.y()) return 0.0;
  double total = 0.0;
  for (const Lattice& lat : lattices_) {
    const double gx = (x + half.x()) / lat.spacing;
    const double gy = (y + half.y()) / lat.spacing;
    const int i = std::min(static_cast<int>(gx), lat.nx - 2);
    const int j = std::min(static_cast<int>(gy), lat.ny - 2);
    const double fx = gx - i;
    const double fy = gy - j;
    const auto at = [&](int a, int b) { return lat.values[static_cast<std::size_t>(b) * lat.nx + a]; };
    const double bottom = at(i, j) + fx * (at(i + 1, j) - at(i, j));
    const double top = at(i, j + 1) + fx * (at(i + 1, j + 1) - at(i, j + 1));
    total += bottom + fy * (top - bottom);
  }
  return total;
}

double Scene::ground_intensity(double x, double y) const {
  for (const Target& t : spec_.targets) {
    const double dx = x - t.center.x();
    const double dy = y - t.center.y();
    if (dx * dx + dy * dy <= t.radius * t.radius) return t.intensity;
  }
  return spec_.texture.base_intensity + texture(x, y);
}

double Scene::ground_height(double x) const { return x * std::tan(spec_.ground_tilt); }

std::optional<double> Scene::occluder_at(double x, double y) const {
  if (disks_.empty()) return std::nullopt;
  const Vec2 half = 0.5 * spec_.ground_extent;
  const int cx = static_cast<int>(std::floor((x + half.x()) / cell_));
  const int cy = static_cast<int>(std::floor((y + half.y()) / cell_));
  const double r2 = spec_.occluders.radius * spec_.occluders.radius;
  std::uint32_t first = UINT32_MAX;
  for (int gy = cy - 1; gy <= cy + 1; ++gy) {
    if (gy < 0 || gy >= grid_ny_) continue;
    for (int gx = cx - 1; gx <= cx + 1; ++gx) {
      if (gx < 0 || gx >= grid_nx_) continue;
      for (std::uint32_t i : grid_[static_cast<std::size_t>(gy) * grid_nx_ + gx]) {
        const double dx = x - disks_[i].x;
        const double dy = y - disks_[i].y;
        if (dx * dx + dy * dy <= r2 && i < first) first = i;
      }
    }
  }
  if (first == UINT32_MAX) return std::nullopt;
  return disks_[first].intensity;
}

double Scene::trace(const Vec3& origin, const Vec3& direction, bool* occluded) const {
  if (occluded) *occluded = false;
  if (!disks_.empty() && direction.z() < 0.0 && origin.z() > spec_.occluders.height) {
    const double s = (spec_.occluders.height - origin.z()) / direction.z();
    const Vec3 hit = origin + s * direction;
    if (const auto v = occluder_at(hit.x(), hit.y())) {
      if (occluded) *occluded = true;
      return *v;
    }
  }
  const double slope = std::tan(spec_.ground_tilt);
  const double denom = slope * direction.x() - direction.z();
  const double s = denom != 0.0 ? (origin.z() - slope * origin.x()) / denom : -1.0;
  if (!(s > 0.0)) return spec_.texture.base_intensity;
  const Vec3 ground = origin + s * direction;
  return ground_intensity(ground.x(), ground.y());
}

RenderedViews render_views(const SceneSpec& scene_spec, const CaptureSpec& capture, const FocalPlane& reference_plane,
                           std::uint64_t seed) {
  capture.validate(scene_spec);
  reference_plane.validate();
  const Scene scene(scene_spec, seed);
  const CameraIntrinsics& K = capture.intrinsics;

  RenderedViews out;
  out.true_poses = capture.poses();
  for (std::size_t v = 0; v < out.true_poses.size(); ++v) {
    const PoseParams& pose = out.true_poses[v];
    const Mat3 R = camera_to_world(pose);
    auto rng = make_rng(seed, v, kPixelNoise);
    std::normal_distribution<double> noise(0.0, 1.0);
    ImageRaster image(K.width, K.height);
    std::vector<std::uint8_t> occluded(image.size(), 0);
    for (int j = 0; j < K.height; ++j) {
      for (int i = 0; i < K.width; ++i) {
        const Vec3 ray((i + 0.5 - K.principal_point.x()) / K.focal_length_px,
                       (j + 0.5 - K.principal_point.y()) / K.focal_length_px, 1.0);
        bool hit = false;
        const double value = scene.trace(pose.center(), R * ray, &hit);
        image.set(i, j, static_cast<float>(value + capture.pixel_noise_sigma * noise(rng)));
        occluded[image.index(i, j)] = hit ? 1 : 0;
      }
    }
    out.images.push_back(std::move(image));
    out.occluded.push_back(std::move(occluded));
  }

  out.reference = ImageRaster(reference_plane.cols, reference_plane.rows);
  for (int r = 0; r < reference_plane.rows; ++r) {
    for (int c = 0; c < reference_plane.cols; ++c) {
      const Vec3 P = reference_plane.point_at(c + 0.5, r + 0.5);
      out.reference.set(c, r, static_cast<float>(scene.ground_intensity(P.x(), P.y())));
    }
  }
  return out;
}

std::vector<PoseParams> perturb_poses(std::span<const PoseParams> poses, const PerturbationSpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed, 0, kPoseNoise);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PoseParams> out(poses.begin(), poses.end());
  for (PoseParams& p : out) {
    for (PoseParam which : kAllPoseParams) component(p, which) += spec.sigma[static_cast<std::size_t>(which)] * normal(rng);
    p = p.normalized();
  }
  return out;
}

OcclusionStats scene_statistics(const SceneSpec& scene, double pixel_noise_sigma) {
  const double noise = pixel_noise_sigma * pixel_noise_sigma;
  OcclusionStats s;
  s.D = scene.occluders.density > 0.0 ? occlusion_probability(scene.occluders.density, scene.occluders.radius) : 0.0;
  s.mu_o = scene.occluders.intensity_mean;
  s.sigma2_o = scene.occluders.intensity_variance + noise;
  s.mu_s = scene.texture.base_intensity;
  s.sigma2_s = scene.texture.variance + noise;
  return s;
}

double aligned_position_error(std::span<const PoseParams> estimated, std::span<const PoseParams> truth) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("pose counts differ");
  const std::size_t n = estimated.size();
  if (n == 0) return 0.0;
  Vec2 ce = Vec2::Zero(), ct = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    ce += Vec2(estimated[i].t_x, estimated[i].t_y);
    ct += Vec2(truth[i].t_x, truth[i].t_y);
  }
  ce /= static_cast<double>(n);
  ct /= static_cast<double>(n);
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    H += (Vec2(estimated[i].t_x, estimated[i].t_y) - ce) * (Vec2(truth[i].t_x, truth[i].t_y) - ct).transpose();
  }
  const double theta = std::atan2(H(0, 1) - H(1, 0), H(0, 0) + H(1, 1));
  Eigen::Matrix2d R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = R * (Vec2(estimated[i].t_x, estimated[i].t_y) - ce) + ct;
    total += (e - Vec2(truth[i].t_x, truth[i].t_y)).norm();
  }
  return total / static_cast<double>(n);
}

double psnr(const ImageRaster& image, const ImageRaster& reference, const Roi& roi) {
  roi.validate(reference.width(), reference.height());
  if (image.width() != reference.width() || image.height() != reference.height()) {
    throw GridMismatch("image and reference sizes differ");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, se = 0.0;
  std::size_t n = 0;
  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      if (!reference.valid(x, y)) continue;
      lo = std::min(lo, static_cast<double>(reference.at(x, y)));
      hi = std::max(hi, static_cast<double>(reference.at(x, y)));
      if (!image.valid(x, y)) continue;
      const double d = static_cast<double>(image.at(x, y)) - reference.at(x, y);
      se += d * d;
      ++n;
    }
  }
  if (n == 0) throw InsufficientPixels();
  const double mse = se / static_cast<double>(n);
  if (mse == 0.0) return kPsnrCap;
  const double peak = hi > lo ? hi - lo : 1.0;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

EvaluationMetrics evaluate_poses(const RefinementResult& result, std::span<const PoseParams> initial_poses,
                                 std::span<const PoseParams> true_poses) {
  const std::size_t M = true_poses.size();
  if (initial_poses.size() != M || result.corrected_poses.size() != M || result.included.size() != M) {
    throw std::invalid_argument("evaluation inputs do not correspond by index");
  }
  EvaluationMetrics m;
  for (PoseParam p : kAllPoseParams) {
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      double db = component(initial_poses[i], p) - component(true_poses[i], p);
      double da = component(result.corrected_poses[i], p) - component(true_poses[i], p);
      if (is_angle(p)) {
        db = normalize_angle(db);
        da = normalize_angle(da);
      }
      before += db * db;
      after += da * da;
    }
    const std::size_t k = static_cast<std::size_t>(p);
    m.rmse_before[k] = M ? std::sqrt(before / M) : 0.0;
    m.rmse_after[k] = M ? std::sqrt(after / M) : 0.0;
  }

  std::vector<PoseParams> sel_initial, sel_after, sel_truth;
  for (std::size_t i = 0; i < M; ++i) {
    if (!result.included[i]) continue;
    sel_initial.push_back(initial_poses[i]);
    sel_after.push_back(result.corrected_poses[i]);
    sel_truth.push_back(true_poses[i]);
  }
  m.aligned_error_before = aligned_position_error(sel_initial, sel_truth);
  m.aligned_error_after = aligned_position_error(sel_after, sel_truth);
  m.error_reduction_percent =
      m.aligned_error_before > 0.0 ? 100.0 * (1.0 - m.aligned_error_after / m.aligned_error_before) : 0.0;

  m.objective_before = result.initial_objective;
  m.objective_after = result.final_objective;
  m.gain_percent = m.objective_before != 0.0 ? 100.0 * (m.objective_after / m.objective_before - 1.0) : 0.0;
  m.parameter_evaluations = result.parameter_evaluations;
  m.baseline_parameters = 6 * M;
  m.parameter_reduction_percent =
      M ? 100.0 * (1.0 - static_cast<double>(m.parameter_evaluations) / static_cast<double>(m.baseline_parameters)) : 0.0;
  return m;
}

EvaluationMetrics evaluate(const RefinementResult& result, std::span<const PoseParams> initial_poses,
                           std::span<const PoseParams> true_poses, const ImageRaster& integral,
                           const ImageRaster& reference, const Roi& roi) {
  EvaluationMetrics m = evaluate_poses(result, initial_poses, true_poses);
  m.psnr_db = psnr(integral, reference, roi);
  return m;
}

}  // namespace aos
