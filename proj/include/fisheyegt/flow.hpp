#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/geometry.hpp"
#include "fisheyegt/motion.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// A dynamic object appears in the id raster but one of its two poses is
/// missing and it is not marked as newly spawned.
class MissingTransformError : public std::runtime_error {
 public:
  explicit MissingTransformError(std::vector<ObjectId> ids);
  const std::vector<ObjectId>& ids() const noexcept { return ids_; }

 private:
  std::vector<ObjectId> ids_;
};

/// The source pixels are not reproduced by projecting with the t-1 pose.
class PoseInconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Object-to-world poses at t-1 and t. Objects without any pose are static;
/// spawned objects (and objects that vanish at t) get no flow.
struct ObjectMotion {
  TransformMap prev;
  TransformMap curr;
  std::set<ObjectId> spawned;
};

struct ScenePoint {
  Vec3 prev = Vec3::Zero();  // world position at t-1
  Vec3 curr = Vec3::Zero();  // world position at t
  bool valid = false;
};

struct SceneFlow {
  int width = 0;
  int height = 0;
  std::vector<ScenePoint> points;  // row-major

  const ScenePoint& at(int x, int y) const noexcept {
    return points[static_cast<std::size_t>(y) * width + x];
  }
};

/// World-space correspondences for every pixel of the t-1 render. `depth`
/// follows the raster convention of `camera` (plane depth for pinhole, ray
/// distance for fisheye); `ids` are the t-1 instance ids. Points on object o
/// move by T_o(t) T_o(t-1)^-1; everything else stays in place.
SceneFlow scene_flow(const RasterF& depth, const Raster32& ids, const CameraModel& camera,
                     const RigidTransform& cam_to_world_prev, const ObjectMotion& motion);

struct FlowOptions {
  /// Depth raster rendered at t in the same camera; enables the occlusion flag.
  const RasterF* depth_curr = nullptr;
  double occlusion_margin = 0.05;     // meters
  double self_check_tolerance = 1e-3; // pixels
  /// Fraction of points allowed to fail the self check before the poses are
  /// declared inconsistent.
  double max_mismatch_fraction = 0.01;
};

/// Two-channel (dx, dy) flow from t-1 to t, NaN where invalid. A pixel is
/// valid when both endpoints are inside the lens coverage; the t endpoint
/// may land outside the raster. Occluded pixels keep their flow and are
/// flagged in `occluded`: the t depth at the nearest pixel, or the inverse
/// depth interpolated at the end point, is closer by more than the margin.
struct FlowField {
  RasterF flow;
  Raster8 valid;     // 0/1
  Raster8 occluded;  // 0/1
};

FlowField optical_flow(const SceneFlow& scene, const CameraModel& camera,
                       const RigidTransform& cam_to_world_prev,
                       const RigidTransform& cam_to_world_curr, const FlowOptions& options = {});

/// Color-wheel parameters, recorded next to every colorized flow image.
struct FlowWheel {
  /// Hue 0 (red) points along +x; hue grows with atan2(dy, dx) in image
  /// coordinates (y down). Saturation is |flow| / max_magnitude clamped to 1,
  /// value is 1, so zero flow is white. Invalid pixels are black.
  double max_magnitude = 0.0;  // 0 = the largest valid magnitude
};

Raster8 flow_colorize(const FlowField& flow, const FlowWheel& wheel = {});

/// Magnitude used by flow_colorize for `wheel` on `flow`.
double flow_color_scale(const FlowField& flow, const FlowWheel& wheel);

}  // namespace fisheyegt
