#include "fisheyegt/cubemap.hpp"

#include <fmt/format.h>

#include <cmath>

namespace fisheyegt {
namespace {

// Columns are the face's right, down and forward axes in the camera frame.
Mat3 make_face_rotation(const Vec3& right, const Vec3& down, const Vec3& forward) {
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return r;
}

const std::array<Mat3, kFaceCount>& face_rotations() {
  static const std::array<Mat3, kFaceCount> rotations = {
      make_face_rotation(Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()),     // front
      make_face_rotation(Vec3::UnitZ(), Vec3::UnitY(), -Vec3::UnitX()),    // left
      make_face_rotation(-Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX()),    // right
      make_face_rotation(Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY()),    // up
      make_face_rotation(Vec3::UnitX(), -Vec3::UnitZ(), Vec3::UnitY()),    // down
  };
  return rotations;
}

}  // namespace

std::string_view face_name(CubeFace face) noexcept {
  switch (face) {
    case CubeFace::front: return "front";
    case CubeFace::left: return "left";
    case CubeFace::right: return "right";
    case CubeFace::up: return "up";
    case CubeFace::down: return "down";
  }
  return "?";
}

std::optional<CubeFace> parse_face(std::string_view name) noexcept {
  for (CubeFace f : kCubeFaces) {
    if (face_name(f) == name) return f;
  }
  return std::nullopt;
}

double max_five_face_theta() noexcept {
  // The back face wins once -z exceeds both |x| and |y|; the earliest such
  // direction lies on the diagonal |x| = |y|, i.e. tan(theta) = -sqrt(2).
  return std::numbers::pi - std::atan(std::sqrt(2.0));
}

const Mat3& face_rotation(CubeFace face) noexcept {
  return face_rotations()[static_cast<int>(face)];
}

std::optional<CubeFace> select_face(const Vec3& dir) noexcept {
  const double ax = std::abs(dir.x());
  const double ay = std::abs(dir.y());
  const double az = std::abs(dir.z());
  if (az >= ax && az >= ay) {
    if (dir.z() > 0.0) return CubeFace::front;
    return std::nullopt;
  }
  if (ax >= ay) return dir.x() > 0.0 ? CubeFace::right : CubeFace::left;
  return dir.y() > 0.0 ? CubeFace::down : CubeFace::up;
}

PinholeIntrinsics face_intrinsics(int face_size) {
  return PinholeIntrinsics(90.0, face_size, face_size);
}

Vec2 face_coordinates(CubeFace face, const Vec3& dir, int face_size) noexcept {
  const Vec3 local = face_rotation(face).transpose() * dir;
  const double half = 0.5 * face_size;  // 90 degrees: focal length = half the side
  return {half + half * local.x() / local.z(), half + half * local.y() / local.z()};
}

Vec3 face_direction(CubeFace face, const Vec2& uv, int face_size) noexcept {
  const double half = 0.5 * face_size;
  const Vec3 local((uv.x() - half) / half, (uv.y() - half) / half, 1.0);
  return face_rotation(face) * local.normalized();
}

double face_ray_factor(const Vec2& uv, int face_size) noexcept {
  const double half = 0.5 * face_size;
  const double a = (uv.x() - half) / half;
  const double b = (uv.y() - half) / half;
  return std::sqrt(1.0 + a * a + b * b);
}

template <typename T>
void CubemapFaceSet<T>::validate() const {
  if (face_size <= 0) throw DomainError("cubemap face size must be positive");
  const auto& first = faces[0];
  for (CubeFace f : kCubeFaces) {
    const auto& face = faces[static_cast<int>(f)];
    if (face.empty()) throw DomainError(fmt::format("cubemap face '{}' is missing", face_name(f)));
    if (!face.same_shape(face_size, face_size)) {
      throw DomainError(fmt::format("cubemap face '{}' is {}x{}, expected {}x{}", face_name(f),
                                    face.width(), face.height(), face_size, face_size));
    }
    if (face.channels() != first.channels() || face.content() != first.content()) {
      throw DomainError("cubemap faces disagree on channel count or content kind");
    }
  }
}

template struct CubemapFaceSet<std::uint8_t>;
template struct CubemapFaceSet<std::uint16_t>;
template struct CubemapFaceSet<std::uint32_t>;
template struct CubemapFaceSet<float>;

}  // namespace fisheyegt
