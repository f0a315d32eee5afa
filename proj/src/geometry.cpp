#include "aos/geometry.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace aos {

namespace {

// Nadir camera body frame expressed in world axes: x stays, y and z flip.
const Mat3& nadir_flip() {
  static const Mat3 flip = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  return flip;
}

constexpr double kEdgeOnTolerance = 1e-6;
constexpr double kOnPlaneTolerance = 1e-9;

}  // namespace

double normalize_angle(double radians) {
  if (radians > -kPi && radians <= kPi) return radians;
  double wrapped = std::fmod(radians + kPi, 2.0 * kPi);
  if (wrapped <= 0.0) wrapped += 2.0 * kPi;
  return wrapped - kPi;
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 K = Mat3::Identity();
  K(0, 0) = focal_length_px;
  K(1, 1) = focal_length_px;
  K(0, 2) = principal_point.x();
  K(1, 2) = principal_point.y();
  return K;
}

void CameraIntrinsics::validate() const {
  if (!(focal_length_px > 0.0)) throw std::invalid_argument("focal length must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("image size must be at least 1x1");
  if (principal_point.x() < 0.0 || principal_point.x() > width || principal_point.y() < 0.0 ||
      principal_point.y() > height) {
    throw std::invalid_argument("principal point lies outside the image");
  }
}

PoseParams PoseParams::normalized() const {
  PoseParams p = *this;
  p.alpha = normalize_angle(alpha);
  p.beta = normalize_angle(beta);
  p.gamma = normalize_angle(gamma);
  return p;
}

double& component(PoseParams& pose, PoseParam which) {
  switch (which) {
    case PoseParam::TX: return pose.t_x;
    case PoseParam::TY: return pose.t_y;
    case PoseParam::TZ: return pose.t_z;
    case PoseParam::Alpha: return pose.alpha;
    case PoseParam::Beta: return pose.beta;
    case PoseParam::Gamma: return pose.gamma;
  }
  throw std::invalid_argument("unknown pose parameter");
}

double component(const PoseParams& pose, PoseParam which) {
  return component(const_cast<PoseParams&>(pose), which);
}

std::string_view to_string(PoseParam which) {
  switch (which) {
    case PoseParam::TX: return "t_x";
    case PoseParam::TY: return "t_y";
    case PoseParam::TZ: return "t_z";
    case PoseParam::Alpha: return "alpha";
    case PoseParam::Beta: return "beta";
    case PoseParam::Gamma: return "gamma";
  }
  return "?";
}

bool is_angle(PoseParam which) {
  return which == PoseParam::Alpha || which == PoseParam::Beta || which == PoseParam::Gamma;
}

FocalPlane FocalPlane::horizontal(double z, Vec2 center, Vec2 extent, int cols, int rows) {
  FocalPlane plane;
  plane.anchor = Vec3(center.x(), center.y(), z);
  plane.unit_normal = Vec3::UnitZ();
  plane.raster_extent = extent;
  plane.cols = cols;
  plane.rows = rows;
  return plane;
}

void FocalPlane::validate() const {
  if (std::abs(unit_normal.norm() - 1.0) > 1e-9) throw std::invalid_argument("plane normal must have unit length");
  if (cols < 1 || rows < 1) throw std::invalid_argument("plane raster must be at least 1x1");
  if (!(raster_extent.x() > 0.0) || !(raster_extent.y() > 0.0)) {
    throw std::invalid_argument("plane raster extent must be positive");
  }
}

Vec3 FocalPlane::axis_u() const {
  Vec3 seed = Vec3::UnitX();
  if (std::abs(unit_normal.dot(seed)) > 0.9) seed = Vec3::UnitY();
  return (seed - seed.dot(unit_normal) * unit_normal).normalized();
}

Vec3 FocalPlane::axis_v() const { return unit_normal.cross(axis_u()); }

Vec3 FocalPlane::point_at(double col, double row) const {
  return anchor + (col - 0.5 * cols) * pixel_size_u() * axis_u() - (row - 0.5 * rows) * pixel_size_v() * axis_v();
}

Eigen::Matrix<double, 4, 3> FocalPlane::raster_to_world() const {
  const Vec3 du = pixel_size_u() * axis_u();
  const Vec3 dv = -pixel_size_v() * axis_v();
  const Vec3 origin = anchor - 0.5 * cols * du - 0.5 * rows * dv;
  Eigen::Matrix<double, 4, 3> A = Eigen::Matrix<double, 4, 3>::Zero();
  A.block<3, 1>(0, 0) = du;
  A.block<3, 1>(0, 1) = dv;
  A.block<3, 1>(0, 2) = origin;
  A(3, 2) = 1.0;
  return A;
}

Mat3 rotation_from_euler(double alpha, double beta, double gamma) {
  return (Eigen::AngleAxisd(alpha, Vec3::UnitX()) * Eigen::AngleAxisd(beta, Vec3::UnitY()) *
          Eigen::AngleAxisd(gamma, Vec3::UnitZ()))
      .toRotationMatrix();
}

Mat3 camera_to_world(const PoseParams& pose) {
  return nadir_flip() * rotation_from_euler(pose.alpha, pose.beta, pose.gamma);
}

Mat3 world_to_camera(const PoseParams& pose) { return camera_to_world(pose).transpose(); }

Eigen::Matrix<double, 3, 4> extrinsic_matrix(const PoseParams& pose) {
  const Mat3 R = world_to_camera(pose);
  Eigen::Matrix<double, 3, 4> Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = -R * pose.center();
  return Rt;
}

Eigen::Matrix<double, 3, 4> projection_matrix(const CameraIntrinsics& K, const PoseParams& pose) {
  return K.matrix() * extrinsic_matrix(pose);
}

Vec3 to_camera_frame(const PoseParams& pose, const Vec3& world_point) {
  return world_to_camera(pose) * (world_point - pose.center());
}

Vec2 project_point(const CameraIntrinsics& K, const PoseParams& pose, const Vec3& world_point) {
  const Vec3 c = to_camera_frame(pose, world_point);
  if (!(c.z() > 0.0)) throw BehindCamera();
  return {K.focal_length_px * c.x() / c.z() + K.principal_point.x(),
          K.focal_length_px * c.y() / c.z() + K.principal_point.y()};
}

double image_plane_error(const CameraIntrinsics& K, const PoseParams& from, const PoseParams& to,
                         std::span<const Vec3> sample_points) {
  double total = 0.0;
  std::size_t visible = 0;
  for (const Vec3& P : sample_points) {
    try {
      total += (project_point(K, to, P) - project_point(K, from, P)).norm();
      ++visible;
    } catch (const BehindCamera&) {
    }
  }
  if (visible == 0) throw NoVisiblePoints();
  return total / static_cast<double>(visible);
}

double image_plane_error(const CameraIntrinsics& K, const PoseParams& pose, PoseParam param, double delta,
                         std::span<const Vec3> sample_points) {
  PoseParams perturbed = pose;
  component(perturbed, param) += delta;
  return image_plane_error(K, pose, perturbed, sample_points);
}

double compensating_translation(double delta_angle, TiltAxis /*axis*/, double t_z) {
  // Positive alpha tilts the optical axis towards +y, positive beta towards +x.
  return t_z * std::tan(delta_angle);
}

Mat3 homography_to_plane(const CameraIntrinsics& K, const PoseParams& pose, const FocalPlane& plane) {
  const double height = plane.unit_normal.dot(pose.center() - plane.anchor);
  if (std::abs(height) < kOnPlaneTolerance) throw DegenerateView("camera center lies on the focal plane");
  const Vec3 axis = camera_to_world(pose).col(2);
  if (std::abs(plane.unit_normal.dot(axis)) < kEdgeOnTolerance) {
    throw DegenerateView("focal plane is viewed edge-on");
  }
  const Mat3 H = projection_matrix(K, pose) * plane.raster_to_world();
  if (std::abs(H.determinant()) < 1e-12 * std::pow(H.norm(), 3)) throw DegenerateView("singular plane homography");
  return H;
}

}  // namespace aos
