#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fisheyegt/bev.hpp"
#include "fisheyegt/camera.hpp"
#include "fisheyegt/geometry.hpp"
#include "fisheyegt/hash.hpp"

namespace fisheyegt {

/// One surround-view camera: lens model plus its pose on the vehicle.
/// `cam_to_ego` maps optical-frame points (+Z forward, +X right, +Y down)
/// into the ego frame (+X forward, +Y left, +Z up).
struct Calibration {
  std::string name;
  std::optional<CameraRole> role;
  FisheyeIntrinsics intr;
  RigidTransform cam_to_ego;
};

/// Rotation from optical axes to forward-left-up axes of the same sensor.
const Mat3& optical_to_flu() noexcept;

/// Reads the calibration schema:
///   {"name", "role"?, "model": "polynomial4", "coeffs": [a1..a4],
///    "principal": [cx, cy], "size": [w, h], "theta_max_deg"?,
///    "extrinsic": {"rotation": 3x3 or 9 values | "quaternion": {w, x, y, z},
///                  "translation": [x, y, z],
///                  "convention": "sensor_to_vehicle" | "vehicle_to_sensor",
///                  "axes": "optical" | "flu"}}
/// Throws ConfigError naming the offending field.
Calibration parse_calibration(const nlohmann::json& j);
nlohmann::json calibration_to_json(const Calibration& calib);

Calibration load_calibration(const std::filesystem::path& path);

/// Hash of the canonical intrinsics and extrinsics text; a LUT built for one
/// calibration carries it so a stale LUT can be detected.
Digest calibration_fingerprint(const Calibration& calib);

/// Helpers shared by the JSON readers. All throw ConfigError naming `field`.
Mat3 json_rotation(const nlohmann::json& j, const std::string& field);
Vec3 json_vec3(const nlohmann::json& j, const std::string& field);
Mat4 json_mat4(const nlohmann::json& j, const std::string& field);
nlohmann::json mat4_to_json(const Mat4& m);
nlohmann::json mat3_to_json(const Mat3& m);

}  // namespace fisheyegt
