#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aos/geometry.hpp"
#include "aos/integration.hpp"
#include "aos/nelder_mead.hpp"
#include "aos/raster.hpp"

namespace aos {

/// Which pose parameters a refinement may change, with per-parameter
/// initial simplex steps and symmetric bounds around the starting pose.
struct SearchSpace {
  std::vector<PoseParam> active;
  std::array<double, 6> initial_step{};  ///< indexed by PoseParam; meters or radians
  std::array<double, 6> bounds{};        ///< indexed by PoseParam; meters or radians

  static SearchSpace six();
  static SearchSpace four();   ///< t_x, t_y, t_z, gamma
  static SearchSpace three();  ///< t_x, t_y, gamma
  static SearchSpace two();    ///< t_x, t_y
  /// "six", "four", "three" or "two".
  static SearchSpace from_name(std::string_view name);

  std::string name() const;
  double step(PoseParam p) const { return initial_step[static_cast<std::size_t>(p)]; }
  double bound(PoseParam p) const { return bounds[static_cast<std::size_t>(p)]; }
  void validate() const;
};

enum class StrategyKind { BruteForce, EarlyStopping, Selection };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_from_name(std::string_view name);  ///< "brute", "early" or "select"

/// Region of the warped view used to rank images by glv.
enum class GlvRegion { Roi, Frame };

struct StrategyConfig {
  StrategyKind kind = StrategyKind::EarlyStopping;
  int patience = 1;
  GlvRegion glv_region = GlvRegion::Roi;

  void validate() const;
};

/// Nelder-Mead settings used for pose refinement. Coordinates handed to the
/// optimizer are scaled by the search-space steps, so x_tolerance is a
/// fraction of one initial step.
NelderMeadConfig default_refine_config();

struct PoseRefinement {
  PoseParams pose;
  double objective = 0.0;
  double initial_objective = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Maximizes the normalized variance of (acc + image warped at a candidate
/// pose) over the active parameters. With an empty accumulator the pose is
/// returned unchanged together with the single-image objective.
PoseRefinement refine_image_pose(const IntegralAccumulator& acc, const ImageRaster& image, const CameraIntrinsics& K,
                                 const PoseParams& pose0, const SearchSpace& space, const FocalPlane& plane,
                                 const Roi& roi, const NelderMeadConfig& nm);

/// The integration decisions of one strategy, fed one objective per step.
class StrategyTracker {
 public:
  enum class Action { Integrate, Reject, Stop };

  explicit StrategyTracker(StrategyConfig config);

  /// Objective after the reference image.
  void start(double objective);
  /// Objective the accumulator would reach by integrating the next image.
  Action step(double candidate);

  double current() const { return current_; }
  double best() const { return best_; }
  /// Integrated image count at the running maximum (early stopping rollback point).
  std::size_t best_count() const { return best_count_; }
  std::size_t integrated() const { return integrated_; }

 private:
  StrategyConfig config_;
  double current_ = 0.0;
  double best_ = 0.0;
  std::size_t best_count_ = 0;
  std::size_t integrated_ = 0;
  int dips_ = 0;
};

struct StepFailure {
  std::size_t image = 0;
  std::string message;
};

struct RefinementResult {
  std::vector<PoseParams> corrected_poses;  ///< initial pose for images not in the final integral
  std::vector<bool> included;
  std::vector<std::size_t> order;            ///< glv order of images that could be ranked
  std::vector<std::size_t> processed;        ///< images in the order they were stepped through
  std::vector<double> objective_trace;       ///< candidate objective per processed image
  std::size_t n_stop = 0;                    ///< images in the final integral
  std::size_t parameter_evaluations = 0;     ///< sum of active parameters over optimized images
  std::size_t objective_evaluations = 0;
  double final_objective = 0.0;
  double initial_objective = 0.0;            ///< included images at their initial poses, same order
  std::vector<double> refinement_gains;      ///< objective(refined) - objective(initial) per optimized image
  std::vector<StepFailure> failures;
};

/// GLV-ordered sequential registration and integration.
RefinementResult run_strategy(std::span<const ImageRaster> images, std::span<const PoseParams> initial_poses,
                              const CameraIntrinsics& K, const FocalPlane& plane, const Roi& roi,
                              const SearchSpace& space, const StrategyConfig& strategy, const NelderMeadConfig& nm);

/// Integrates images (in the given order) at the given poses.
IntegralAccumulator integrate(std::span<const ImageRaster> images, std::span<const PoseParams> poses,
                              std::span<const std::size_t> order, const CameraIntrinsics& K, const FocalPlane& plane,
                              const Roi& roi);

struct PlaneSearch {
  double z_min = -5.0;
  double z_max = 5.0;
  int z_steps = 21;
  bool refine_orientation = false;
};

/// Grid search over plane height maximizing the integral's glv, followed by
/// Nelder-Mead over height (and two tilt angles when requested). `layout`
/// provides the raster center, extent and resolution.
FocalPlane optimize_focal_plane(std::span<const ImageRaster> images, std::span<const PoseParams> poses,
                                const CameraIntrinsics& K, const FocalPlane& layout, const Roi& roi,
                                const PlaneSearch& search, const NelderMeadConfig& nm);

/// Plane through (center, z) with normal Rx(tilt_x) * Ry(tilt_y) * e_z.
FocalPlane tilted_plane(const FocalPlane& layout, double z, double tilt_x, double tilt_y);

}  // namespace aos
