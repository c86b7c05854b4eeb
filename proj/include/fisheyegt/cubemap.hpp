#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// The five cubemap faces needed for a forward-looking lens of up to ~250
/// degrees. There is no back face.
enum class CubeFace : std::uint8_t { front = 0, left = 1, right = 2, up = 3, down = 4 };

inline constexpr std::array<CubeFace, 5> kCubeFaces = {CubeFace::front, CubeFace::left,
                                                        CubeFace::right, CubeFace::up,
                                                        CubeFace::down};
inline constexpr int kFaceCount = 5;

std::string_view face_name(CubeFace face) noexcept;
std::optional<CubeFace> parse_face(std::string_view name) noexcept;

/// Largest incident angle any five-face cubemap can serve: beyond it some
/// directions pierce the missing back face.
double max_five_face_theta() noexcept;

/// Rotation taking face-camera coordinates (+Z along the face axis) into the
/// fisheye camera frame.
const Mat3& face_rotation(CubeFace face) noexcept;

/// Face whose axis has the largest-magnitude component of `dir`; nullopt
/// when that is the (absent) back face.
std::optional<CubeFace> select_face(const Vec3& dir) noexcept;

/// 90-degree pinhole intrinsics of a square face.
PinholeIntrinsics face_intrinsics(int face_size);

/// Face-plane coordinates of `dir` (camera frame) on `face`, unclamped.
Vec2 face_coordinates(CubeFace face, const Vec3& dir, int face_size) noexcept;

/// Unit direction (camera frame) through face coordinates (u, v).
Vec3 face_direction(CubeFace face, const Vec2& uv, int face_size) noexcept;

/// sqrt(1 + a^2 + b^2) for the face pixel (u, v), a = (u - c)/f, b = (v - c)/f:
/// ray distance divided by plane depth along that pixel's ray.
double face_ray_factor(const Vec2& uv, int face_size) noexcept;

/// Rasters for the five faces; all square with the same side length.
template <typename T>
struct CubemapFaceSet {
  int face_size = 0;
  std::array<Raster<T>, kFaceCount> faces;

  Raster<T>& operator[](CubeFace f) noexcept { return faces[static_cast<int>(f)]; }
  const Raster<T>& operator[](CubeFace f) const noexcept { return faces[static_cast<int>(f)]; }

  /// Throws DomainError when a face is missing or has the wrong size, or the
  /// faces disagree on channel count or content kind.
  void validate() const;
};

extern template struct CubemapFaceSet<std::uint8_t>;
extern template struct CubemapFaceSet<std::uint16_t>;
extern template struct CubemapFaceSet<std::uint32_t>;
extern template struct CubemapFaceSet<float>;

}  // namespace fisheyegt
