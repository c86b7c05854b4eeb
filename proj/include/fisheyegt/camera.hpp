#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <variant>

#include "fisheyegt/geometry.hpp"
#include "fisheyegt/types.hpp"

namespace fisheyegt {

// Camera frame convention used throughout the toolkit: the optical axis is +Z,
// +X points right and +Y points down. Pixel coordinates are continuous with
// integer values at pixel centers.

/// Fisheye lens described by a fourth-order radial polynomial
///
///   r(theta) = a1 theta + a2 theta^2 + a3 theta^3 + a4 theta^4
///
/// mapping the incident angle theta (radians, measured from +Z) to the image
/// radius in pixels around the principal point. Construction verifies that
/// r is strictly increasing on [0, theta_max]; every other operation relies
/// on that to invert the polynomial.
class FisheyeIntrinsics {
 public:
  /// Half of a 190 degree horizontal field of view.
  static constexpr double kDefaultThetaMax = 95.0 * std::numbers::pi / 180.0;
  /// Number of samples used by the monotonicity check.
  static constexpr int kMonotonicitySamples = 4096;

  FisheyeIntrinsics(const std::array<double, 4>& coeffs, const Vec2& principal, int width,
                    int height, double theta_max = kDefaultThetaMax);

  const std::array<double, 4>& coeffs() const noexcept { return coeffs_; }
  double cx() const noexcept { return principal_.x(); }
  double cy() const noexcept { return principal_.y(); }
  const Vec2& principal() const noexcept { return principal_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double theta_max() const noexcept { return theta_max_; }
  /// r(theta_max): radius of the coverage circle in pixels.
  double max_radius() const noexcept { return max_radius_; }

  /// Polynomial value without range checks.
  double radius(double theta) const noexcept {
    const auto& a = coeffs_;
    return theta * (a[0] + theta * (a[1] + theta * (a[2] + theta * a[3])));
  }
  double radius_derivative(double theta) const noexcept {
    const auto& a = coeffs_;
    return a[0] + theta * (2.0 * a[1] + theta * (3.0 * a[2] + theta * 4.0 * a[3]));
  }

  bool operator==(const FisheyeIntrinsics&) const = default;

 private:
  std::array<double, 4> coeffs_;
  Vec2 principal_;
  int width_;
  int height_;
  double theta_max_;
  double max_radius_;
};

/// r(theta). Throws DomainError when theta is outside [0, theta_max].
double radius_from_theta(const FisheyeIntrinsics& intr, double theta);

/// Inverse of radius_from_theta: bisection to bracket the root, then
/// safeguarded Newton steps. Throws OutOfCoverage when r exceeds
/// r(theta_max) and DomainError for negative r.
double theta_from_radius(const FisheyeIntrinsics& intr, double r);

/// Projects a unit direction (camera frame). Returns nullopt when the angle
/// to the optical axis exceeds theta_max; throws DomainError when |dir| is
/// not 1 within 1e-9.
std::optional<Vec2> fisheye_project(const FisheyeIntrinsics& intr, const Vec3& dir);

/// Unit direction for a pixel. Throws OutOfCoverage outside the coverage circle.
Vec3 fisheye_unproject(const FisheyeIntrinsics& intr, const Vec2& pixel);

/// Hot-path variants: any nonzero camera-frame point / no exceptions.
std::optional<Vec2> fisheye_project_point(const FisheyeIntrinsics& intr, const Vec3& p);
std::optional<Vec3> fisheye_try_unproject(const FisheyeIntrinsics& intr, const Vec2& pixel);

/// Focal length in pixels of a pinhole camera with the given horizontal field
/// of view: width / (2 tan(pi fov / 360)). Throws DomainError outside (0, 180).
double pinhole_focal(double fov_deg, double width);

/// Ideal pinhole camera with square pixels and principal point at the image
/// center:
///
///       | f 0 w/2 |
///   K = | 0 f h/2 |
///       | 0 0  1  |
class PinholeIntrinsics {
 public:
  PinholeIntrinsics(double fov_deg, int width, int height);

  double fov_deg() const noexcept { return fov_deg_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double focal() const noexcept { return focal_; }
  double cx() const noexcept { return 0.5 * width_; }
  double cy() const noexcept { return 0.5 * height_; }
  Mat3 K() const;

  bool operator==(const PinholeIntrinsics&) const = default;

 private:
  double fov_deg_;
  int width_;
  int height_;
  double focal_;
};

/// Camera-frame point K^-1 (x, y, 1)^T d for plane depth d (distance along
/// the optical axis).
Vec3 pinhole_backproject_camera(const PinholeIntrinsics& intr, const Vec2& pixel, double depth);

/// World point for a pixel with plane depth `depth`. Throws DomainError for
/// non-positive depth or a pixel outside [0, width] x [0, height].
Vec3 backproject(const PinholeIntrinsics& intr, const RigidTransform& cam_to_world,
                 const Vec2& pixel, double depth);

/// Perspective projection; nullopt for points not in front of the camera.
std::optional<Vec2> pinhole_project(const PinholeIntrinsics& intr, const Vec3& p);

/// Either lens model, for code that works on both representations.
using CameraModel = std::variant<PinholeIntrinsics, FisheyeIntrinsics>;

int camera_width(const CameraModel& cam) noexcept;
int camera_height(const CameraModel& cam) noexcept;

/// Projects a camera-frame point; nullopt outside the model's coverage.
std::optional<Vec2> project(const CameraModel& cam, const Vec3& p);

/// Camera-frame point from a pixel and its depth value. The depth semantics
/// follow the raster convention of each model: plane depth for pinhole
/// rasters, Euclidean ray distance for fisheye rasters.
std::optional<Vec3> backproject_camera(const CameraModel& cam, const Vec2& pixel, double depth);

/// The depth value a camera-frame point would have in that model's raster.
double depth_value(const CameraModel& cam, const Vec3& p) noexcept;

}  // namespace fisheyegt
