#include "fisheyegt/camera.hpp"

#include <fmt/format.h>

#include <cmath>

#include "fisheyegt/errors.hpp"

namespace fisheyegt {

FisheyeIntrinsics::FisheyeIntrinsics(const std::array<double, 4>& coeffs, const Vec2& principal,
                                     int width, int height, double theta_max)
    : coeffs_(coeffs),
      principal_(principal),
      width_(width),
      height_(height),
      theta_max_(theta_max),
      max_radius_(0.0) {
  if (width <= 0 || height <= 0) {
    throw DomainError(fmt::format("fisheye image size {}x{} must be positive", width, height));
  }
  if (!(principal.x() >= 0.0 && principal.x() < width && principal.y() >= 0.0 &&
        principal.y() < height)) {
    throw DomainError(fmt::format("principal point ({}, {}) lies outside the {}x{} image",
                                  principal.x(), principal.y(), width, height));
  }
  if (!(theta_max > 0.0 && theta_max < std::numbers::pi)) {
    throw DomainError(fmt::format("theta_max {} rad must lie in (0, pi)", theta_max));
  }
  for (double a : coeffs) {
    if (!std::isfinite(a)) throw DomainError("fisheye polynomial coefficient is not finite");
  }

  double previous = 0.0;
  for (int i = 0; i <= kMonotonicitySamples; ++i) {
    const double theta = theta_max * i / kMonotonicitySamples;
    if (!(radius_derivative(theta) > 0.0)) {
      throw DomainError(fmt::format(
          "fisheye polynomial is not strictly increasing: r'({:.6f}) = {:.6g}", theta,
          radius_derivative(theta)));
    }
    const double r = radius(theta);
    if (i > 0 && !(r > previous)) {
      throw DomainError(
          fmt::format("fisheye polynomial is not strictly increasing near theta {:.6f}", theta));
    }
    previous = r;
  }
  max_radius_ = radius(theta_max);
}

double radius_from_theta(const FisheyeIntrinsics& intr, double theta) {
  if (!(theta >= 0.0 && theta <= intr.theta_max())) {
    throw DomainError(fmt::format("theta {} rad outside [0, {}]", theta, intr.theta_max()));
  }
  return intr.radius(theta);
}

namespace {

// Root of r(theta) = target on [0, theta_max]; target must already be in range.
double invert_radius(const FisheyeIntrinsics& intr, double target) {
  if (target <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = intr.theta_max();
  if (target >= intr.max_radius()) return hi;

  // Coarse bracket first; Newton converges quadratically from there.
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (intr.radius(mid) < target ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);
  for (int iter = 0; iter < 32; ++iter) {
    const double residual = intr.radius(theta) - target;
    if (residual == 0.0) break;
    (residual < 0.0 ? lo : hi) = theta;
    double next = theta - residual / intr.radius_derivative(theta);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - theta) <= 1e-15 * (1.0 + theta)) {
      theta = next;
      break;
    }
    theta = next;
  }
  return theta;
}

}  // namespace

double theta_from_radius(const FisheyeIntrinsics& intr, double r) {
  if (!(r >= 0.0)) throw DomainError(fmt::format("radius {} px must be non-negative", r));
  if (r > intr.max_radius()) {
    throw OutOfCoverage(
        fmt::format("radius {} px exceeds the coverage radius {} px", r, intr.max_radius()));
  }
  return invert_radius(intr, r);
}

std::optional<Vec2> fisheye_project_point(const FisheyeIntrinsics& intr, const Vec3& p) {
  const double rho = std::hypot(p.x(), p.y());
  const double theta = std::atan2(rho, p.z());
  if (!(theta <= intr.theta_max())) return std::nullopt;
  if (rho == 0.0) {
    if (p.z() > 0.0) return intr.principal();
    return std::nullopt;
  }
  const double r = intr.radius(theta) / rho;
  return Vec2(intr.cx() + r * p.x(), intr.cy() + r * p.y());
}

std::optional<Vec2> fisheye_project(const FisheyeIntrinsics& intr, const Vec3& dir) {
  if (!(std::abs(dir.norm() - 1.0) <= 1e-9)) {
    throw DomainError(fmt::format("fisheye_project expects a unit direction, |dir| = {}",
                                  dir.norm()));
  }
  return fisheye_project_point(intr, dir);
}

std::optional<Vec3> fisheye_try_unproject(const FisheyeIntrinsics& intr, const Vec2& pixel) {
  const double dx = pixel.x() - intr.cx();
  const double dy = pixel.y() - intr.cy();
  const double r = std::hypot(dx, dy);
  if (!(r <= intr.max_radius())) return std::nullopt;
  if (r == 0.0) return Vec3(0.0, 0.0, 1.0);
  const double theta = invert_radius(intr, r);
  const double s = std::sin(theta) / r;
  return Vec3(s * dx, s * dy, std::cos(theta));
}

Vec3 fisheye_unproject(const FisheyeIntrinsics& intr, const Vec2& pixel) {
  auto dir = fisheye_try_unproject(intr, pixel);
  if (!dir) {
    throw OutOfCoverage(fmt::format("pixel ({}, {}) lies outside the fisheye coverage circle",
                                    pixel.x(), pixel.y()));
  }
  return *dir;
}

double pinhole_focal(double fov_deg, double width) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw DomainError(fmt::format("field of view {} deg outside (0, 180)", fov_deg));
  }
  // Extended precision so that tan(45 deg) rounds to exactly 1.
  const long double half = std::numbers::pi_v<long double> * fov_deg / 360.0L;
  return static_cast<double>(width / (2.0L * std::tan(half)));
}

PinholeIntrinsics::PinholeIntrinsics(double fov_deg, int width, int height)
    : fov_deg_(fov_deg), width_(width), height_(height), focal_(pinhole_focal(fov_deg, width)) {
  if (width <= 0 || height <= 0) {
    throw DomainError(fmt::format("pinhole image size {}x{} must be positive", width, height));
  }
}

Mat3 PinholeIntrinsics::K() const {
  Mat3 k;
  k << focal_, 0.0, cx(), 0.0, focal_, cy(), 0.0, 0.0, 1.0;
  return k;
}

Vec3 pinhole_backproject_camera(const PinholeIntrinsics& intr, const Vec2& pixel, double depth) {
  return Vec3((pixel.x() - intr.cx()) / intr.focal() * depth,
              (pixel.y() - intr.cy()) / intr.focal() * depth, depth);
}

Vec3 backproject(const PinholeIntrinsics& intr, const RigidTransform& cam_to_world,
                 const Vec2& pixel, double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw DomainError(fmt::format("depth {} m must be positive and finite", depth));
  }
  if (!(pixel.x() >= 0.0 && pixel.x() <= intr.width() && pixel.y() >= 0.0 &&
        pixel.y() <= intr.height())) {
    throw DomainError(fmt::format("pixel ({}, {}) outside the {}x{} raster", pixel.x(),
                                  pixel.y(), intr.width(), intr.height()));
  }
  return cam_to_world.apply(pinhole_backproject_camera(intr, pixel, depth));
}

std::optional<Vec2> pinhole_project(const PinholeIntrinsics& intr, const Vec3& p) {
  if (!(p.z() > 0.0)) return std::nullopt;
  return Vec2(intr.cx() + intr.focal() * p.x() / p.z(), intr.cy() + intr.focal() * p.y() / p.z());
}

int camera_width(const CameraModel& cam) noexcept {
  return std::visit([](const auto& c) { return c.width(); }, cam);
}

int camera_height(const CameraModel& cam) noexcept {
  return std::visit([](const auto& c) { return c.height(); }, cam);
}

std::optional<Vec2> project(const CameraModel& cam, const Vec3& p) {
  if (const auto* pin = std::get_if<PinholeIntrinsics>(&cam)) return pinhole_project(*pin, p);
  return fisheye_project_point(std::get<FisheyeIntrinsics>(cam), p);
}

std::optional<Vec3> backproject_camera(const CameraModel& cam, const Vec2& pixel, double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth)) return std::nullopt;
  if (const auto* pin = std::get_if<PinholeIntrinsics>(&cam)) {
    return pinhole_backproject_camera(*pin, pixel, depth);
  }
  auto dir = fisheye_try_unproject(std::get<FisheyeIntrinsics>(cam), pixel);
  if (!dir) return std::nullopt;
  return Vec3(*dir * depth);
}

double depth_value(const CameraModel& cam, const Vec3& p) noexcept {
  if (std::holds_alternative<PinholeIntrinsics>(cam)) return p.z();
  return p.norm();
}

}  // namespace fisheyegt
