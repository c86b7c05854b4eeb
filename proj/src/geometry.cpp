#include "fisheyegt/geometry.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>
#include <cmath>
#include <unordered_set>

#include "fisheyegt/errors.hpp"

namespace fisheyegt {

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation)) {
    throw DomainError("RigidTransform: rotation block is not orthonormal with det +1");
  }
  if (!translation.allFinite()) {
    throw DomainError("RigidTransform: translation is not finite");
  }
}

RigidTransform RigidTransform::from_matrix(const Mat4& m, bool orthonormalize) {
  const Eigen::RowVector4d last = m.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw DomainError("RigidTransform: last row of a pose matrix must be (0, 0, 0, 1)");
  }
  Mat3 r = m.topLeftCorner<3, 3>();
  if (orthonormalize) {
    if (!is_rotation(r, 1e-3)) {
      throw DomainError("RigidTransform: pose rotation is too far from orthonormal");
    }
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r = svd.matrixU() * svd.matrixV().transpose();
  }
  return {r, m.topRightCorner<3, 1>()};
}

RigidTransform RigidTransform::from_quaternion(double w, double x, double y, double z,
                                               const Vec3& translation) {
  Eigen::Quaterniond q(w, x, y, z);
  if (!(q.norm() > 1e-12)) throw DomainError("RigidTransform: zero quaternion");
  q.normalize();
  return {q.toRotationMatrix(), translation};
}

RigidTransform RigidTransform::compose(const RigidTransform& rhs) const noexcept {
  return {Unchecked{}, rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const noexcept {
  const Mat3 rt = rotation_.transpose();
  return {Unchecked{}, rt, -(rt * translation_)};
}

Mat4 RigidTransform::matrix() const noexcept {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool RigidTransform::is_approx(const RigidTransform& other, double tol) const noexcept {
  return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
         (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
}

Mat3 rotation_about_x(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix();
}
Mat3 rotation_about_y(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix();
}
Mat3 rotation_about_z(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

OrientedBox3D::OrientedBox3D(ObjectId object_id, std::uint8_t class_id, const Vec3& center,
                             const Vec3& half_extents, const Mat3& rotation)
    : object_id_(object_id),
      class_id_(class_id),
      center_(center),
      half_extents_(half_extents),
      rotation_(rotation) {
  if (!(half_extents.minCoeff() > 0.0) || !half_extents.allFinite()) {
    throw DomainError(fmt::format("box {}: half extents must be strictly positive", object_id));
  }
  if (!center.allFinite()) {
    throw DomainError(fmt::format("box {}: center is not finite", object_id));
  }
  if (!is_rotation(rotation)) {
    throw DomainError(fmt::format("box {}: rotation is not orthonormal", object_id));
  }
}

OrientedBox3D OrientedBox3D::transformed(const RigidTransform& motion) const {
  return {object_id_, class_id_, motion.apply(center_), half_extents_,
          motion.rotation() * rotation_};
}

bool point_in_box(const Vec3& point, const OrientedBox3D& box, double epsilon) noexcept {
  const Vec3 local = box.rotation().transpose() * (point - box.center());
  const Vec3& h = box.half_extents();
  return std::abs(local.x()) <= h.x() + epsilon && std::abs(local.y()) <= h.y() + epsilon &&
         std::abs(local.z()) <= h.z() + epsilon;
}

void check_unique_ids(std::span<const OrientedBox3D> boxes) {
  std::unordered_set<ObjectId> seen;
  for (const auto& box : boxes) {
    if (box.object_id() == 0) throw DomainError("box object_id 0 is reserved for background");
    if (!seen.insert(box.object_id()).second) {
      throw DomainError(fmt::format("duplicate box object_id {}", box.object_id()));
    }
  }
}

}  // namespace fisheyegt
