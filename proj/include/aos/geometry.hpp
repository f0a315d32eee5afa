#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace aos {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi]. Angles already in range are returned unchanged.
double normalize_angle(double radians);

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BehindCamera : public GeometryError {
 public:
  BehindCamera() : GeometryError("point is behind the camera") {}
};

class NoVisiblePoints : public GeometryError {
 public:
  NoVisiblePoints() : GeometryError("no sample point is visible from both poses") {}
};

class DegenerateView : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Pinhole intrinsics. Pixel (i, j) covers [i, i+1) x [j, j+1); its center sits at (i+0.5, j+0.5).
struct CameraIntrinsics {
  double focal_length_px = 1.0;
  Vec2 principal_point = Vec2::Zero();
  int width = 1;
  int height = 1;

  Mat3 matrix() const;
  void validate() const;
};

/// The six extrinsic parameters of one view. (t_x, t_y, t_z) is the camera
/// center in world coordinates; the angles are radians.
struct PoseParams {
  double t_x = 0.0;
  double t_y = 0.0;
  double t_z = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  Vec3 center() const { return {t_x, t_y, t_z}; }
  PoseParams normalized() const;

  bool operator==(const PoseParams&) const = default;
};

enum class PoseParam { TX = 0, TY, TZ, Alpha, Beta, Gamma };

inline constexpr std::array<PoseParam, 6> kAllPoseParams = {
    PoseParam::TX, PoseParam::TY, PoseParam::TZ, PoseParam::Alpha, PoseParam::Beta, PoseParam::Gamma};

double& component(PoseParams& pose, PoseParam which);
double component(const PoseParams& pose, PoseParam which);
std::string_view to_string(PoseParam which);
bool is_angle(PoseParam which);

/// A planar raster in world space. The anchor is the raster center; columns
/// run along axis_u() and rows run against axis_v(), so a horizontal plane
/// is laid out north-up.
struct FocalPlane {
  Vec3 anchor = Vec3::Zero();
  Vec3 unit_normal = Vec3::UnitZ();
  Vec2 raster_extent = Vec2(1.0, 1.0);
  int cols = 1;
  int rows = 1;

  static FocalPlane horizontal(double z, Vec2 center, Vec2 extent, int cols, int rows);

  void validate() const;
  Vec3 axis_u() const;
  Vec3 axis_v() const;
  double pixel_size_u() const { return raster_extent.x() / cols; }
  double pixel_size_v() const { return raster_extent.y() / rows; }
  /// World point for continuous raster coordinates (col, row).
  Vec3 point_at(double col, double row) const;
  /// 4x3 homogeneous map from (col, row, 1) to world (X, Y, Z, 1).
  Eigen::Matrix<double, 4, 3> raster_to_world() const;
};

/// R = Rx(alpha) * Ry(beta) * Rz(gamma).
Mat3 rotation_from_euler(double alpha, double beta, double gamma);

/// Camera-to-world rotation. The Euler rotation acts on the body axes of a
/// nadir camera (x right, y down, z along the optical axis); at zero angles
/// the optical axis is world -z and image x is world +x.
Mat3 camera_to_world(const PoseParams& pose);
Mat3 world_to_camera(const PoseParams& pose);

/// Extrinsic matrix (R | t) with t = -R * C.
Eigen::Matrix<double, 3, 4> extrinsic_matrix(const PoseParams& pose);
Eigen::Matrix<double, 3, 4> projection_matrix(const CameraIntrinsics& K, const PoseParams& pose);

Vec3 to_camera_frame(const PoseParams& pose, const Vec3& world_point);

/// Throws BehindCamera when the camera-frame depth is not positive.
Vec2 project_point(const CameraIntrinsics& K, const PoseParams& pose, const Vec3& world_point);

/// Mean pixel displacement of the sample points between `pose` and `pose`
/// with `param` offset by `delta`. Points invisible in either pose are skipped.
double image_plane_error(const CameraIntrinsics& K, const PoseParams& pose, PoseParam param, double delta,
                         std::span<const Vec3> sample_points);

/// Mean pixel displacement between two arbitrary poses.
double image_plane_error(const CameraIntrinsics& K, const PoseParams& from, const PoseParams& to,
                         std::span<const Vec3> sample_points);

enum class TiltAxis { Alpha, Beta };

/// Translation that shifts the central image point like a tilt error does.
/// A beta error is matched along t_x and an alpha error along t_y; with this
/// module's axis convention both equal t_z * tan(delta).
double compensating_translation(double delta_angle, TiltAxis axis, double t_z);

/// Maps homogeneous plane raster coordinates (col, row, 1) to image pixels.
/// Throws DegenerateView when the camera lies on the plane or views it edge-on.
Mat3 homography_to_plane(const CameraIntrinsics& K, const PoseParams& pose, const FocalPlane& plane);

}  // namespace aos
