#include "fisheyegt/calibration.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numbers>

namespace fisheyegt {
using nlohmann::json;

namespace {

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(fmt::format("'{}' must be a number", field));
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& field, std::size_t n) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (v.is_array()) {
        for (const auto& w : v) out.push_back(number(w, field));
      } else {
        out.push_back(number(v, field));
      }
    }
  }
  if (out.size() != n) {
    throw ConfigError(fmt::format("'{}' must hold {} numbers", field, n));
  }
  return out;
}

const json& member(const json& j, const std::string& key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(fmt::format("missing '{}'", field));
  return j.at(key);
}

}  // namespace

const Mat3& optical_to_flu() noexcept {
  // Columns: optical X (right) -> -Y, optical Y (down) -> -Z, optical Z -> +X.
  static const Mat3 m = (Mat3() << 0, 0, 1, -1, 0, 0, 0, -1, 0).finished();
  return m;
}

Mat3 json_rotation(const json& j, const std::string& field) {
  if (j.contains("quaternion")) {
    const json& q = j.at("quaternion");
    const std::string qf = field + ".quaternion";
    const double w = number(member(q, "w", qf + ".w"), qf + ".w");
    const double x = number(member(q, "x", qf + ".x"), qf + ".x");
    const double y = number(member(q, "y", qf + ".y"), qf + ".y");
    const double z = number(member(q, "z", qf + ".z"), qf + ".z");
    try {
      return RigidTransform::from_quaternion(w, x, y, z, Vec3::Zero()).rotation();
    } catch (const DomainError& e) {
      throw ConfigError(fmt::format("'{}': {}", qf, e.what()));
    }
  }
  const auto v = numbers(member(j, "rotation", field + ".rotation"), field + ".rotation", 9);
  Mat3 r;
  r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  try {
    return RigidTransform::from_matrix(m, true).rotation();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("'{}.rotation': {}", field, e.what()));
  }
}

Vec3 json_vec3(const json& j, const std::string& field) {
  const auto v = numbers(j, field, 3);
  return {v[0], v[1], v[2]};
}

Mat4 json_mat4(const json& j, const std::string& field) {
  const auto v = numbers(j, field, 16);
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(4 * r + c)];
  }
  return m;
}

json mat4_to_json(const Mat4& m) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  return rows;
}

json mat3_to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

Calibration parse_calibration(const json& j) {
  if (!j.is_object()) throw ConfigError("calibration must be a JSON object");
  const std::string model = j.value("model", std::string("polynomial4"));
  if (model != "polynomial4") {
    throw ConfigError(fmt::format("'model': unsupported lens model '{}'", model));
  }
  const auto c = numbers(member(j, "coeffs", "coeffs"), "coeffs", 4);
  const auto pp = numbers(member(j, "principal", "principal"), "principal", 2);
  const auto size = numbers(member(j, "size", "size"), "size", 2);
  const double theta_deg =
      j.contains("theta_max_deg") ? number(j.at("theta_max_deg"), "theta_max_deg")
                                  : FisheyeIntrinsics::kDefaultThetaMax * 180.0 / std::numbers::pi;
  if (size[0] != std::floor(size[0]) || size[1] != std::floor(size[1])) {
    throw ConfigError("'size' must be integral");
  }
  std::optional<FisheyeIntrinsics> intr;
  try {
    intr.emplace(std::array<double, 4>{c[0], c[1], c[2], c[3]}, Vec2(pp[0], pp[1]),
                 static_cast<int>(size[0]), static_cast<int>(size[1]),
                 theta_deg * std::numbers::pi / 180.0);
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("intrinsics: {}", e.what()));
  }

  const json& ex = member(j, "extrinsic", "extrinsic");
  Mat3 r = json_rotation(ex, "extrinsic");
  const Vec3 t = json_vec3(member(ex, "translation", "extrinsic.translation"),
                           "extrinsic.translation");
  const std::string axes = ex.value("axes", std::string("optical"));
  const std::string convention = ex.value("convention", std::string("sensor_to_vehicle"));
  RigidTransform pose(r, t);
  if (convention == "vehicle_to_sensor") {
    pose = pose.inverse();
  } else if (convention != "sensor_to_vehicle") {
    throw ConfigError(fmt::format("'extrinsic.convention': unknown value '{}'", convention));
  }
  if (axes == "flu") {
    pose = RigidTransform(pose.rotation() * optical_to_flu(), pose.translation());
  } else if (axes != "optical") {
    throw ConfigError(fmt::format("'extrinsic.axes': unknown value '{}'", axes));
  }

  Calibration calib{j.value("name", std::string()), std::nullopt, std::move(*intr), pose};
  if (j.contains("role")) {
    const auto name = j.at("role").is_string() ? j.at("role").get<std::string>() : std::string();
    calib.role = parse_role(name);
    if (!calib.role) throw ConfigError(fmt::format("'role': unknown camera role '{}'", name));
  }
  return calib;
}

json calibration_to_json(const Calibration& calib) {
  const auto& in = calib.intr;
  json j{{"name", calib.name},
         {"model", "polynomial4"},
         {"coeffs", in.coeffs()},
         {"principal", {in.cx(), in.cy()}},
         {"size", {in.width(), in.height()}},
         {"theta_max_deg", in.theta_max() * 180.0 / std::numbers::pi},
         {"extrinsic",
          {{"rotation", mat3_to_json(calib.cam_to_ego.rotation())},
           {"translation",
            {calib.cam_to_ego.translation().x(), calib.cam_to_ego.translation().y(),
             calib.cam_to_ego.translation().z()}},
           {"convention", "sensor_to_vehicle"},
           {"axes", "optical"}}}};
  if (calib.role) j["role"] = std::string(role_name(*calib.role));
  return j;
}

Calibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open calibration {}", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  auto calib = parse_calibration(j);
  if (calib.name.empty()) calib.name = path.stem().string();
  return calib;
}

Digest calibration_fingerprint(const Calibration& calib) {
  std::string text = "polynomial4";
  for (double c : calib.intr.coeffs()) text += fmt::format(";{:.17g}", c);
  text += fmt::format(";{:.17g};{:.17g};{};{};{:.17g}", calib.intr.cx(), calib.intr.cy(),
                      calib.intr.width(), calib.intr.height(), calib.intr.theta_max());
  const Mat4 m = calib.cam_to_ego.matrix();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) text += fmt::format(";{:.17g}", m(r, c));
  }
  return sha256(text);
}

}  // namespace fisheyegt
