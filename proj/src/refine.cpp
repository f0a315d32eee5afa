#include "aos/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aos {

namespace {

constexpr double kRejected = -std::numeric_limits<double>::infinity();

std::size_t slot(PoseParam p) { return static_cast<std::size_t>(p); }

SearchSpace with_params(std::vector<PoseParam> active) {
  SearchSpace s;
  s.active = std::move(active);
  for (PoseParam p : kAllPoseParams) {
    s.initial_step[slot(p)] = is_angle(p) ? deg2rad(1.0) : 0.5;
    s.bounds[slot(p)] = is_angle(p) ? deg2rad(5.0) : 3.0;
  }
  return s;
}

}  // namespace

SearchSpace SearchSpace::six() { return with_params({kAllPoseParams.begin(), kAllPoseParams.end()}); }

SearchSpace SearchSpace::four() {
  return with_params({PoseParam::TX, PoseParam::TY, PoseParam::TZ, PoseParam::Gamma});
}

SearchSpace SearchSpace::three() { return with_params({PoseParam::TX, PoseParam::TY, PoseParam::Gamma}); }

SearchSpace SearchSpace::two() { return with_params({PoseParam::TX, PoseParam::TY}); }

SearchSpace SearchSpace::from_name(std::string_view name) {
  if (name == "six") return six();
  if (name == "four") return four();
  if (name == "three") return three();
  if (name == "two") return two();
  throw std::invalid_argument("unknown search space '" + std::string(name) + "' (expected six|four|three|two)");
}

std::string SearchSpace::name() const {
  std::string out;
  for (PoseParam p : active) {
    if (!out.empty()) out += ',';
    out += to_string(p);
  }
  return out;
}

void SearchSpace::validate() const {
  if (active.empty()) throw std::invalid_argument("search space has no active parameters");
  for (PoseParam p : active) {
    if (!(step(p) > 0.0)) throw std::invalid_argument("initial step must be positive for " + std::string(to_string(p)));
    if (!(bound(p) > 0.0)) throw std::invalid_argument("bound must be positive for " + std::string(to_string(p)));
  }
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::BruteForce: return "brute";
    case StrategyKind::EarlyStopping: return "early";
    case StrategyKind::Selection: return "select";
  }
  return "?";
}

StrategyKind strategy_from_name(std::string_view name) {
  if (name == "brute") return StrategyKind::BruteForce;
  if (name == "early") return StrategyKind::EarlyStopping;
  if (name == "select") return StrategyKind::Selection;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "' (expected brute|early|select)");
}

void StrategyConfig::validate() const {
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
}

NelderMeadConfig default_refine_config() {
  NelderMeadConfig nm;
  nm.f_tolerance = 1e-7;
  nm.x_tolerance = 0.01;
  nm.max_iterations = 300;
  return nm;
}

PoseRefinement refine_image_pose(const IntegralAccumulator& acc, const ImageRaster& image, const CameraIntrinsics& K,
                                 const PoseParams& pose0, const SearchSpace& space, const FocalPlane& plane,
                                 const Roi& roi, const NelderMeadConfig& nm) {
  PoseRefinement out;
  out.pose = pose0;
  if (acc.empty()) {
    IntegralAccumulator single(plane.cols, plane.rows, roi);
    single.accumulate(warp_to_plane(image, K, pose0, plane), 0);
    out.objective = out.initial_objective = normalized_variance(single, roi);
    out.evaluations = 1;
    out.converged = true;
    return out;
  }
  space.validate();

  auto pose_at = [&](std::span<const double> x) {
    PoseParams p = pose0;
    for (std::size_t j = 0; j < space.active.size(); ++j) component(p, space.active[j]) += x[j] * space.step(space.active[j]);
    return p;
  };

  // Errors at the start pose propagate; elsewhere they just reject the candidate.
  out.initial_objective = candidate_normalized_variance(acc, PlaneSampler(image, K, pose0, plane), roi);

  const Objective objective = [&](std::span<const double> x) {
    for (std::size_t j = 0; j < space.active.size(); ++j) {
      if (std::abs(x[j] * space.step(space.active[j])) > space.bound(space.active[j])) return kRejected;
    }
    try {
      return candidate_normalized_variance(acc, PlaneSampler(image, K, pose_at(x), plane), roi);
    } catch (const GeometryError&) {
      return kRejected;
    } catch (const InsufficientPixels&) {
      return kRejected;
    }
  };

  const std::vector<double> x0(space.active.size(), 0.0);
  const NelderMeadResult r = nelder_mead(objective, x0, nm, Sense::Maximize);
  out.pose = pose_at(r.x);
  out.objective = r.f;
  out.evaluations = r.evaluations;
  out.converged = r.converged;
  return out;
}

StrategyTracker::StrategyTracker(StrategyConfig config) : config_(config) { config_.validate(); }

void StrategyTracker::start(double objective) {
  current_ = best_ = objective;
  best_count_ = integrated_ = 1;
  dips_ = 0;
}

StrategyTracker::Action StrategyTracker::step(double candidate) {
  switch (config_.kind) {
    case StrategyKind::BruteForce:
      current_ = candidate;
      ++integrated_;
      if (candidate >= best_) {
        best_ = candidate;
        best_count_ = integrated_;
      }
      return Action::Integrate;
    case StrategyKind::Selection:
      if (!(candidate > current_)) return Action::Reject;
      current_ = best_ = candidate;
      best_count_ = ++integrated_;
      return Action::Integrate;
    case StrategyKind::EarlyStopping:
      if (candidate >= best_) {
        current_ = best_ = candidate;
        best_count_ = ++integrated_;
        dips_ = 0;
        return Action::Integrate;
      }
      if (++dips_ >= config_.patience) return Action::Stop;
      current_ = candidate;
      ++integrated_;
      return Action::Integrate;
  }
  return Action::Stop;
}

IntegralAccumulator integrate(std::span<const ImageRaster> images, std::span<const PoseParams> poses,
                              std::span<const std::size_t> order, const CameraIntrinsics& K, const FocalPlane& plane,
                              const Roi& roi) {
  IntegralAccumulator acc(plane.cols, plane.rows, roi);
  for (std::size_t i : order) acc.accumulate(warp_to_plane(images[i], K, poses[i], plane), i);
  return acc;
}

RefinementResult run_strategy(std::span<const ImageRaster> images, std::span<const PoseParams> initial_poses,
                              const CameraIntrinsics& K, const FocalPlane& plane, const Roi& roi,
                              const SearchSpace& space, const StrategyConfig& strategy, const NelderMeadConfig& nm) {
  if (images.empty()) throw std::invalid_argument("no images to integrate");
  if (images.size() != initial_poses.size()) throw std::invalid_argument("image and pose counts differ");
  space.validate();
  strategy.validate();
  roi.validate(plane.cols, plane.rows);

  const std::size_t M = images.size();
  RefinementResult result;
  result.corrected_poses.assign(initial_poses.begin(), initial_poses.end());
  result.included.assign(M, false);

  // Rank by glv of each view on the focal plane at its initial pose.
  std::vector<double> ranking;
  std::vector<std::size_t> rankable;
  for (std::size_t i = 0; i < M; ++i) {
    try {
      const ImageRaster warped = warp_to_plane(images[i], K, initial_poses[i], plane);
      ranking.push_back(strategy.glv_region == GlvRegion::Roi ? glv(warped, roi) : glv(warped));
      rankable.push_back(i);
    } catch (const std::exception& e) {
      result.failures.push_back({i, e.what()});
    }
  }
  if (rankable.empty()) throw InsufficientPixels();
  for (std::size_t k : sort_by_values(ranking)) result.order.push_back(rankable[k]);

  IntegralAccumulator acc(plane.cols, plane.rows, roi);
  const std::size_t reference = result.order.front();
  acc.accumulate(warp_to_plane(images[reference], K, initial_poses[reference], plane), reference);
  result.processed.push_back(reference);
  result.objective_trace.push_back(acc.objective_trace().back());
  result.included[reference] = true;

  StrategyTracker tracker(strategy);
  tracker.start(acc.objective_trace().back());
  IntegralAccumulator at_best = acc;

  for (std::size_t k = 1; k < result.order.size(); ++k) {
    const std::size_t i = result.order[k];
    PoseRefinement r;
    try {
      r = refine_image_pose(acc, images[i], K, initial_poses[i], space, plane, roi, nm);
    } catch (const std::exception& e) {
      result.failures.push_back({i, e.what()});
      continue;
    }
    result.parameter_evaluations += space.active.size();
    result.objective_evaluations += static_cast<std::size_t>(r.evaluations);
    result.refinement_gains.push_back(r.objective - r.initial_objective);
    result.processed.push_back(i);
    result.objective_trace.push_back(r.objective);

    const auto action = tracker.step(r.objective);
    if (action == StrategyTracker::Action::Stop) break;
    if (action == StrategyTracker::Action::Reject) continue;
    acc.accumulate(warp_to_plane(images[i], K, r.pose, plane), i);
    result.corrected_poses[i] = r.pose.normalized();
    result.included[i] = true;
    if (strategy.kind == StrategyKind::EarlyStopping && tracker.best_count() == tracker.integrated()) at_best = acc;
  }

  if (strategy.kind == StrategyKind::EarlyStopping) acc = at_best;

  std::fill(result.included.begin(), result.included.end(), false);
  for (std::size_t i : acc.order()) result.included[i] = true;
  for (std::size_t i = 0; i < M; ++i) {
    if (!result.included[i]) result.corrected_poses[i] = initial_poses[i];
  }
  result.n_stop = static_cast<std::size_t>(acc.N());
  result.final_objective = acc.objective_trace().back();
  result.initial_objective = integrate(images, initial_poses, acc.order(), K, plane, roi).objective_trace().back();
  return result;
}

FocalPlane tilted_plane(const FocalPlane& layout, double z, double tilt_x, double tilt_y) {
  FocalPlane plane = layout;
  plane.anchor = Vec3(layout.anchor.x(), layout.anchor.y(), z);
  plane.unit_normal = (rotation_from_euler(tilt_x, tilt_y, 0.0) * Vec3::UnitZ()).normalized();
  return plane;
}

FocalPlane optimize_focal_plane(std::span<const ImageRaster> images, std::span<const PoseParams> poses,
                                const CameraIntrinsics& K, const FocalPlane& layout, const Roi& roi,
                                const PlaneSearch& search, const NelderMeadConfig& nm) {
  if (search.z_steps < 2) throw std::invalid_argument("plane search needs at least 2 height steps");
  if (images.size() != poses.size()) throw std::invalid_argument("image and pose counts differ");
  if (search.z_max < search.z_min) throw std::invalid_argument("plane search range is inverted");
  roi.validate(layout.cols, layout.rows);

  auto glv_at = [&](const FocalPlane& plane) {
    IntegralAccumulator acc(plane.cols, plane.rows, roi);
    for (std::size_t i = 0; i < images.size(); ++i) {
      try {
        acc.accumulate(warp_to_plane(images[i], K, poses[i], plane), i);
      } catch (const GeometryError&) {
      }
    }
    if (acc.empty()) return kRejected;
    try {
      return glv(acc.integral(), roi);
    } catch (const InsufficientPixels&) {
      return kRejected;
    }
  };

  if (search.z_min == search.z_max) return tilted_plane(layout, search.z_min, 0.0, 0.0);

  const double dz = (search.z_max - search.z_min) / (search.z_steps - 1);
  double best_z = search.z_min;
  double best_value = kRejected;
  for (int s = 0; s < search.z_steps; ++s) {
    const double z = search.z_min + s * dz;
    const double v = glv_at(tilted_plane(layout, z, 0.0, 0.0));
    if (v > best_value) {
      best_value = v;
      best_z = z;
    }
  }
  if (!std::isfinite(best_value)) throw InsufficientPixels();

  const double tilt_step = deg2rad(1.0);
  auto plane_at = [&](std::span<const double> x) {
    const double tx = x.size() > 1 ? x[1] * tilt_step : 0.0;
    const double ty = x.size() > 2 ? x[2] * tilt_step : 0.0;
    return tilted_plane(layout, best_z + x[0] * dz, tx, ty);
  };
  const std::vector<double> x0(search.refine_orientation ? 3 : 1, 0.0);
  const NelderMeadResult r =
      nelder_mead([&](std::span<const double> x) { return glv_at(plane_at(x)); }, x0, nm, Sense::Maximize);
  return plane_at(r.x);
}

}  // namespace aos
