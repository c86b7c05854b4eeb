#pragma once

// Shared helpers for the test binaries: scratch directories, seeded
// generators and oracles written without the library's math.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/cubemap.hpp"

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "fgt") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// The 1280x966 fixture lens polynomial.
inline fisheyegt::FisheyeIntrinsics wide_lens(double scale = 1.0) {
  const int w = static_cast<int>(std::lround(1280 * scale));
  const int h = static_cast<int>(std::lround(966 * scale));
  return fisheyegt::FisheyeIntrinsics({339.749 * scale, -31.988 * scale, 48.275 * scale, -7.201 * scale},
                                      fisheyegt::Vec2(w / 2.0, h / 2.0), w, h);
}

/// r(theta) summed term by term with std::pow.
inline double oracle_radius(const std::array<double, 4>& a, double theta) {
  double r = 0.0;
  for (int i = 0; i < 4; ++i) r += a[i] * std::pow(theta, i + 1);
  return r;
}

/// Fisheye projection from spherical angles: theta from acos(z), phi from
/// atan2(y, x).
inline fisheyegt::Vec2 oracle_fisheye_project(const fisheyegt::FisheyeIntrinsics& intr, fisheyegt::Vec3 dir) {
  dir.normalize();
  const double theta = std::acos(std::clamp(dir.z(), -1.0, 1.0));
  const double phi = std::atan2(dir.y(), dir.x());
  const double r = oracle_radius(intr.coeffs(), theta);
  return {intr.cx() + r * std::cos(phi), intr.cy() + r * std::sin(phi)};
}

/// Unit direction of a pixel by bisection on r(theta) (200 halvings).
inline fisheyegt::Vec3 oracle_fisheye_unproject(const fisheyegt::FisheyeIntrinsics& intr, const fisheyegt::Vec2& p) {
  const double dx = p.x() - intr.cx();
  const double dy = p.y() - intr.cy();
  const double r = std::hypot(dx, dy);
  double lo = 0.0;
  double hi = intr.theta_max();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_radius(intr.coeffs(), mid) < r ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const double phi = std::atan2(dy, dx);
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

/// Random pixel inside the coverage circle (and the image).
template <typename R>
fisheyegt::Vec2 random_covered_pixel(R& rng, const fisheyegt::FisheyeIntrinsics& intr) {
  for (;;) {
    const fisheyegt::Vec2 p(rng.uniform(0.0, intr.width()), rng.uniform(0.0, intr.height()));
    if ((p - intr.principal()).norm() < intr.max_radius() * 0.999) return p;
  }
}

}  // namespace testutil
