#pragma once

#include <cstdint>
#include <span>

#include "fisheyegt/types.hpp"

namespace fisheyegt {

/// Proper rigid motion x -> R x + t.
///
/// The public constructors reject rotations that are not orthonormal with
/// determinant +1 (tolerance 1e-9). compose() and inverse() keep the result
/// exact up to floating point and skip re-validation.
class RigidTransform {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  /// Builds from a homogeneous 4x4 matrix. When `orthonormalize` is set, a
  /// rotation block that is orthonormal only to single precision (typical of
  /// simulator exports) is projected onto SO(3) first; anything further than
  /// 1e-3 from a rotation is still rejected.
  static RigidTransform from_matrix(const Mat4& m, bool orthonormalize = false);
  /// Quaternion in (w, x, y, z) order; normalized before use.
  static RigidTransform from_quaternion(double w, double x, double y, double z,
                                        const Vec3& translation);

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& p) const noexcept { return rotation_ * p + translation_; }
  Vec3 rotate(const Vec3& v) const noexcept { return rotation_ * v; }

  /// (*this) after rhs: x -> this(rhs(x)).
  RigidTransform compose(const RigidTransform& rhs) const noexcept;
  RigidTransform inverse() const noexcept;
  Mat4 matrix() const noexcept;

  bool is_approx(const RigidTransform& other, double tol) const noexcept;

  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) noexcept {
    return a.compose(b);
  }

 private:
  struct Unchecked {};
  RigidTransform(Unchecked, const Mat3& rotation, const Vec3& translation) noexcept
      : rotation_(rotation), translation_(translation) {}

  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// True when `r` is orthonormal with det +1 within `tol`.
bool is_rotation(const Mat3& r, double tol = RigidTransform::kOrthonormalTolerance);

/// Elementary rotation about a principal axis (right-handed, radians).
Mat3 rotation_about_x(double angle);
Mat3 rotation_about_y(double angle);
Mat3 rotation_about_z(double angle);

/// Object identities are nonzero; zero marks "no instance" in id rasters.
using ObjectId = std::uint32_t;

/// Oriented 3D box in the world frame. `rotation` maps box axes to world axes.
class OrientedBox3D {
 public:
  OrientedBox3D(ObjectId object_id, std::uint8_t class_id, const Vec3& center,
                const Vec3& half_extents, const Mat3& rotation = Mat3::Identity());

  ObjectId object_id() const noexcept { return object_id_; }
  std::uint8_t class_id() const noexcept { return class_id_; }
  const Vec3& center() const noexcept { return center_; }
  const Vec3& half_extents() const noexcept { return half_extents_; }
  const Mat3& rotation() const noexcept { return rotation_; }
  double volume() const noexcept { return 8.0 * half_extents_.prod(); }

  /// The same box moved rigidly by `motion` (world frame).
  OrientedBox3D transformed(const RigidTransform& motion) const;

 private:
  ObjectId object_id_;
  std::uint8_t class_id_;
  Vec3 center_;
  Vec3 half_extents_;
  Mat3 rotation_;
};

inline constexpr double kBoxTolerance = 1e-6;

/// Point containment: the point, expressed in the box frame, lies within
/// half_extent + epsilon on every axis.
bool point_in_box(const Vec3& point, const OrientedBox3D& box, double epsilon = kBoxTolerance) noexcept;

/// Throws DomainError when two boxes share an object id or an id is zero.
void check_unique_ids(std::span<const OrientedBox3D> boxes);

}  // namespace fisheyegt
