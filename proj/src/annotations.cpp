#include "fisheyegt/annotations.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>

#include "fisheyegt/calibration.hpp"
#include "fisheyegt/image_io.hpp"

namespace fisheyegt {
using nlohmann::json;

namespace {

BoxRecord parse_box(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(fmt::format("'{}' must be an object", field));
  for (const char* key : {"object_id", "class_id", "center"}) {
    if (!j.contains(key)) throw ConfigError(fmt::format("missing '{}.{}'", field, key));
  }
  const char* ext_key = j.contains("half_extents") ? "half_extents" : "extents";
  if (!j.contains(ext_key)) throw ConfigError(fmt::format("missing '{}.half_extents'", field));
  const auto& id = j.at("object_id");
  const auto& cls = j.at("class_id");
  if (!id.is_number_unsigned() || !cls.is_number_unsigned() || cls.get<unsigned>() > 255) {
    throw ConfigError(fmt::format("'{}': object_id and class_id must be non-negative integers", field));
  }
  const Mat3 r = (j.contains("rotation") || j.contains("quaternion")) ? json_rotation(j, field)
                                                                      : Mat3::Identity();
  try {
    return {OrientedBox3D(id.get<ObjectId>(), static_cast<std::uint8_t>(cls.get<unsigned>()),
                          json_vec3(j.at("center"), field + ".center"),
                          json_vec3(j.at(ext_key), field + "." + ext_key), r),
            j.value("dynamic", true)};
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("'{}': {}", field, e.what()));
  }
}

std::vector<BoxRecord> parse_box_list(const json& j, const std::string& field) {
  std::vector<BoxRecord> out;
  if (!j.contains(field)) return out;
  if (!j.at(field).is_array()) throw ConfigError(fmt::format("'{}' must be an array", field));
  for (std::size_t i = 0; i < j.at(field).size(); ++i) {
    out.push_back(parse_box(j.at(field)[i], fmt::format("{}[{}]", field, i)));
  }
  std::vector<OrientedBox3D> boxes;
  for (const auto& r : out) boxes.push_back(r.box);
  try {
    check_unique_ids(boxes);
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("'{}': {}", field, e.what()));
  }
  return out;
}

json box_to_json(const BoxRecord& r) {
  const auto& b = r.box;
  return {{"object_id", b.object_id()},
          {"class_id", b.class_id()},
          {"center", {b.center().x(), b.center().y(), b.center().z()}},
          {"half_extents", {b.half_extents().x(), b.half_extents().y(), b.half_extents().z()}},
          {"rotation", mat3_to_json(b.rotation())},
          {"dynamic", r.dynamic}};
}

RigidTransform pose(const json& j, const std::string& field) {
  try {
    return RigidTransform::from_matrix(json_mat4(j, field), true);
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("'{}': {}", field, e.what()));
  }
}

std::pair<RigidTransform, RigidTransform> pose_pair(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("prev") || !j.contains("curr")) {
    throw ConfigError(fmt::format("'{}' needs 'prev' and 'curr' matrices", field));
  }
  return {pose(j.at("prev"), field + ".prev"), pose(j.at("curr"), field + ".curr")};
}

ObjectId parse_id(const std::string& text, const std::string& field) {
  ObjectId id = 0;
  const auto* end = text.data() + text.size();
  if (text.empty() || std::from_chars(text.data(), end, id).ptr != end || id == 0) {
    throw ConfigError(fmt::format("'{}': '{}' is not a valid object id", field, text));
  }
  return id;
}

}  // namespace

std::vector<OrientedBox3D> FrameBoxes::curr_boxes() const {
  std::vector<OrientedBox3D> out;
  for (const auto& r : curr) out.push_back(r.box);
  return out;
}

std::vector<OrientedBox3D> FrameBoxes::prev_boxes() const {
  std::vector<OrientedBox3D> out;
  for (const auto& r : prev) out.push_back(r.box);
  return out;
}

FrameBoxes parse_boxes(const json& j) {
  if (!j.is_object()) throw ConfigError("box file must be a JSON object");
  return {parse_box_list(j, "curr"), parse_box_list(j, "prev")};
}

json boxes_to_json(const FrameBoxes& boxes) {
  json curr = json::array();
  json prev = json::array();
  for (const auto& r : boxes.curr) curr.push_back(box_to_json(r));
  for (const auto& r : boxes.prev) prev.push_back(box_to_json(r));
  return {{"curr", curr}, {"prev", prev}};
}

FrameBoxes load_boxes(const std::filesystem::path& path) { return parse_boxes(read_json_file(path)); }

std::pair<RigidTransform, RigidTransform> FramePoses::camera_poses(
    const std::string& camera, const RigidTransform& cam_to_ego) const {
  if (const auto it = cameras.find(camera); it != cameras.end()) return it->second;
  return {ego_prev * cam_to_ego, ego_curr * cam_to_ego};
}

FramePoses parse_poses(const json& j) {
  if (!j.is_object()) throw ConfigError("pose file must be a JSON object");
  FramePoses p;
  if (j.contains("timestamp")) {
    if (!j.at("timestamp").is_number()) throw ConfigError("'timestamp' must be a number");
    p.timestamp = j.at("timestamp").get<double>();
  }
  if (!j.contains("ego")) throw ConfigError("missing 'ego'");
  std::tie(p.ego_prev, p.ego_curr) = pose_pair(j.at("ego"), "ego");
  if (j.contains("cameras")) {
    for (const auto& [name, v] : j.at("cameras").items()) {
      p.cameras.emplace(name, pose_pair(v, "cameras." + name));
    }
  }
  if (!j.contains("objects")) throw ConfigError("missing 'object_transforms' ('objects')");
  for (const auto& [key, v] : j.at("objects").items()) {
    const std::string field = "objects." + key;
    const ObjectId id = parse_id(key, field);
    if (!v.is_object()) throw ConfigError(fmt::format("'{}' must be an object", field));
    if (v.contains("prev")) p.objects.prev.emplace(id, pose(v.at("prev"), field + ".prev"));
    if (v.contains("curr")) p.objects.curr.emplace(id, pose(v.at("curr"), field + ".curr"));
  }
  if (j.contains("spawned")) {
    for (const auto& v : j.at("spawned")) {
      if (!v.is_number_unsigned()) throw ConfigError("'spawned' must list object ids");
      p.objects.spawned.insert(v.get<ObjectId>());
    }
  }
  return p;
}

json poses_to_json(const FramePoses& p) {
  json objects = json::object();
  auto entry = [&](ObjectId id) -> json& { return objects[std::to_string(id)]; };
  for (const auto& [id, t] : p.objects.prev) entry(id)["prev"] = mat4_to_json(t.matrix());
  for (const auto& [id, t] : p.objects.curr) entry(id)["curr"] = mat4_to_json(t.matrix());
  json j{{"timestamp", p.timestamp},
         {"ego", {{"prev", mat4_to_json(p.ego_prev.matrix())}, {"curr", mat4_to_json(p.ego_curr.matrix())}}},
         {"objects", objects},
         {"spawned", std::vector<ObjectId>(p.objects.spawned.begin(), p.objects.spawned.end())}};
  if (!p.cameras.empty()) {
    json cams = json::object();
    for (const auto& [name, pr] : p.cameras) {
      cams[name] = {{"prev", mat4_to_json(pr.first.matrix())}, {"curr", mat4_to_json(pr.second.matrix())}};
    }
    j["cameras"] = cams;
  }
  return j;
}

FramePoses load_poses(const std::filesystem::path& path) { return parse_poses(read_json_file(path)); }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  const std::string text = j.dump(2) + "\n";
  write_file(path, std::as_bytes(std::span(text)));
}

}  // namespace fisheyegt
