#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fisheyegt/flow.hpp"
#include "fisheyegt/geometry.hpp"

namespace fisheyegt {

struct BoxRecord {
  OrientedBox3D box;
  bool dynamic = true;
};

/// 3D boxes of one frame at t and t-1.
struct FrameBoxes {
  std::vector<BoxRecord> curr;
  std::vector<BoxRecord> prev;

  std::vector<OrientedBox3D> curr_boxes() const;
  std::vector<OrientedBox3D> prev_boxes() const;
};

/// {"curr": [box...], "prev": [box...]}, box = {"object_id", "class_id",
/// "center", "half_extents" (alias "extents"), "rotation" | "quaternion",
/// "dynamic"?}. Throws ConfigError naming the offending field.
FrameBoxes parse_boxes(const nlohmann::json& j);
nlohmann::json boxes_to_json(const FrameBoxes& boxes);
FrameBoxes load_boxes(const std::filesystem::path& path);

/// Poses of one frame, all as 4x4 row-major matrices:
///   {"timestamp", "ego": {"prev", "curr"} (ego-to-world),
///    "cameras"?: {name: {"prev", "curr"}} (sensor-to-world, overriding the
///    ego pose composed with the calibration),
///    "objects": {"id": {"prev"?, "curr"?}} (object-to-world),
///    "spawned"?: [id...]}
struct FramePoses {
  double timestamp = 0.0;
  RigidTransform ego_prev;
  RigidTransform ego_curr;
  std::map<std::string, std::pair<RigidTransform, RigidTransform>> cameras;
  ObjectMotion objects;

  /// Sensor-to-world at t-1 and t for a camera mounted at `cam_to_ego`.
  std::pair<RigidTransform, RigidTransform> camera_poses(const std::string& camera,
                                                         const RigidTransform& cam_to_ego) const;
};

FramePoses parse_poses(const nlohmann::json& j);
nlohmann::json poses_to_json(const FramePoses& poses);
FramePoses load_poses(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fisheyegt
