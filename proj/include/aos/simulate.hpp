#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aos/geometry.hpp"
#include "aos/raster.hpp"
#include "aos/refine.hpp"
#include "aos/variance_model.hpp"

namespace aos {

/// Procedural ground texture: base intensity plus a sum of bilinearly
/// interpolated Gaussian lattices, one per spacing. `variance` is the spatial
/// variance of the resulting field (split evenly between the lattices).
struct TextureSpec {
  double base_intensity = 100.0;
  double variance = 400.0;
  std::vector<double> lattice_spacings{2.0, 0.5};
  std::uint64_t seed = 1;
};

struct Target {
  Vec2 center = Vec2::Zero();
  double radius = 0.5;
  double intensity = 200.0;
};

/// Opaque horizontal disks with Poisson density at one height (Boolean model).
struct OccluderLayer {
  double density = 0.0;  ///< disks per square meter
  double radius = 0.5;
  double height = 10.0;
  double intensity_mean = 100.0;
  double intensity_variance = 100.0;
};

struct SceneSpec {
  Vec2 ground_extent = Vec2(80.0, 80.0);  ///< centered on the origin
  double ground_tilt = 0.0;               ///< radians; ground height is x * tan(tilt)
  TextureSpec texture;
  std::vector<Target> targets;
  OccluderLayer occluders;

  void validate() const;
};

struct CaptureSpec {
  int rows = 5;
  int cols = 6;
  /// Diameter of the circle the grid is inscribed in; equal spacing along x and y.
  double aperture_diameter = 30.0;
  double altitude = 30.0;
  CameraIntrinsics intrinsics{200.0, Vec2(128.0, 128.0), 256, 256};
  double pixel_noise_sigma = 2.0;

  void validate(const SceneSpec& scene) const;
  double spacing() const;
  /// Row-major grid positions, row 0 at +y, centered on the origin.
  std::vector<PoseParams> poses() const;
};

/// Per-parameter Gaussian sigmas, indexed by PoseParam (meters or radians).
struct PerturbationSpec {
  std::array<double, 6> sigma{};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Probability that a ray meets at least one disk: 1 - exp(-density * pi * r^2).
double occlusion_probability(double density, double radius);

/// Procedurally generated scene: texture lattices and the occluder disks.
class Scene {
 public:
  Scene(const SceneSpec& spec, std::uint64_t seed);

  /// Ground intensity at horizontal position (x, y), targets included.
  double ground_intensity(double x, double y) const;
  double ground_height(double x) const;
  /// Intensity of the first disk containing (x, y) at the occluder height.
  std::optional<double> occluder_at(double x, double y) const;
  /// Traces one ray; sets `occluded` when an occluder was hit.
  double trace(const Vec3& origin, const Vec3& direction, bool* occluded = nullptr) const;

  const SceneSpec& spec() const { return spec_; }
  std::size_t occluder_count() const { return disks_.size(); }

 private:
  struct Lattice {
    double spacing;
    double sigma;
    int nx, ny;
    std::vector<double> values;
  };
  struct Disk {
    double x, y, intensity;
  };

  double texture(double x, double y) const;

  SceneSpec spec_;
  std::vector<Lattice> lattices_;
  std::vector<Disk> disks_;
  double cell_ = 1.0;
  int grid_nx_ = 0;
  int grid_ny_ = 0;
  std::vector<std::vector<std::uint32_t>> grid_;
};

struct RenderedViews {
  std::vector<ImageRaster> images;
  std::vector<PoseParams> true_poses;
  ImageRaster reference;  ///< occlusion-free, noise-free ground on the plane raster
  std::vector<std::vector<std::uint8_t>> occluded;  ///< per view, per pixel
};

/// Renders every capture position by exact ray casting. Deterministic per
/// seed; each view draws its pixel noise from its own stream.
RenderedViews render_views(const SceneSpec& scene, const CaptureSpec& capture, const FocalPlane& reference_plane,
                           std::uint64_t seed);

/// Adds independent zero-mean Gaussian noise to every parameter.
std::vector<PoseParams> perturb_poses(std::span<const PoseParams> poses, const PerturbationSpec& spec);

/// Occlusion statistics implied by a scene for single rendered views,
/// pixel noise folded into both variances.
OcclusionStats scene_statistics(const SceneSpec& scene, double pixel_noise_sigma);

inline constexpr double kPsnrCap = 100.0;

struct EvaluationMetrics {
  std::array<double, 6> rmse_before{};  ///< indexed by PoseParam; meters or radians
  std::array<double, 6> rmse_after{};
  /// Mean horizontal position error of the integrated images after the best
  /// rigid alignment (rotation about z plus translation) to the true poses.
  double aligned_error_before = 0.0;
  double aligned_error_after = 0.0;
  double error_reduction_percent = 0.0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double gain_percent = 0.0;
  std::size_t parameter_evaluations = 0;
  std::size_t baseline_parameters = 0;  ///< 6 * number of images
  double parameter_reduction_percent = 0.0;
  double psnr_db = 0.0;
};

/// Pose errors before and after refinement, normalized-variance gain,
/// parameter accounting and PSNR of the integral against the reference.
EvaluationMetrics evaluate(const RefinementResult& result, std::span<const PoseParams> initial_poses,
                           std::span<const PoseParams> true_poses, const ImageRaster& integral,
                           const ImageRaster& reference, const Roi& roi);

/// Everything evaluate() reports except PSNR.
EvaluationMetrics evaluate_poses(const RefinementResult& result, std::span<const PoseParams> initial_poses,
                                 std::span<const PoseParams> true_poses);

/// Best rigid 2-D alignment of estimated camera positions onto the truth;
/// returns the mean residual horizontal distance.
double aligned_position_error(std::span<const PoseParams> estimated, std::span<const PoseParams> truth);

double psnr(const ImageRaster& image, const ImageRaster& reference, const Roi& roi);

}  // namespace aos
