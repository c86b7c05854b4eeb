#include "fisheyegt/dataset.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <regex>

#include "fisheyegt/annotations.hpp"

namespace fisheyegt {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDepthScale = 16777215.0;  // 2^24 - 1

std::string replace_all(std::string s, std::string_view key, std::string_view value) {
  for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
  return s;
}

std::string regex_escape(const std::string& s) {
  static const std::regex special(R"([.^$|()\[\]{}*+?\\])");
  return std::regex_replace(s, special, R"(\$&)");
}

// Template with camera and face filled in, frame left as a capture group.
std::regex frame_pattern(std::string tmpl) {
  const std::string marker = "\x01";
  tmpl = replace_all(std::move(tmpl), "{frame}", marker);
  std::string re = regex_escape(tmpl);
  re = replace_all(re, marker, "([0-9]+)");
  return std::regex(re);
}

const std::map<std::string_view, FrameFile> kFrameFileNames = {
    {"boxes", FrameFile::boxes}, {"poses", FrameFile::poses}, {"meta", FrameFile::meta}};

std::string_view frame_file_name(FrameFile f) {
  for (const auto& [name, v] : kFrameFileNames) {
    if (v == f) return name;
  }
  return "?";
}

}  // namespace

RasterF decode_depth_raster(const Raster8& encoded, double far_plane) {
  if (encoded.channels() != 3) {
    throw FormatError(fmt::format("encoded depth needs 3 channels, got {}", encoded.channels()));
  }
  if (!(far_plane > 0.0)) throw DomainError("far plane must be positive");
  RasterF out(encoded.width(), encoded.height());
  const auto src = encoded.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double code = src[3 * i] + 256.0 * src[3 * i + 1] + 65536.0 * src[3 * i + 2];
    dst[i] = static_cast<float>(code / kDepthScale * far_plane);
  }
  return out;
}

Raster8 encode_depth_raster(const RasterF& depth, double far_plane) {
  if (depth.channels() != 1) throw DomainError("depth raster must have one channel");
  if (!(far_plane > 0.0)) throw DomainError("far plane must be positive");
  Raster8 out(depth.width(), depth.height(), 3);
  const auto src = depth.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double d = std::isnan(src[i]) ? far_plane : std::clamp(double{src[i]}, 0.0, far_plane);
    const auto code = static_cast<std::uint32_t>(std::lround(d / far_plane * kDepthScale));
    dst[3 * i] = static_cast<std::uint8_t>(code & 0xff);
    dst[3 * i + 1] = static_cast<std::uint8_t>((code >> 8) & 0xff);
    dst[3 * i + 2] = static_cast<std::uint8_t>((code >> 16) & 0xff);
  }
  return out;
}

bool is_weather_preset(std::string_view tag) noexcept {
  return std::find(kWeatherPresets.begin(), kWeatherPresets.end(), tag) != kWeatherPresets.end();
}

std::string_view modality_name(FaceModality m) noexcept {
  switch (m) {
    case FaceModality::rgb: return "rgb";
    case FaceModality::depth: return "depth";
    case FaceModality::semantic: return "semantic";
    case FaceModality::rgb_prev: return "rgb_prev";
    case FaceModality::depth_prev: return "depth_prev";
    case FaceModality::semantic_prev: return "semantic_prev";
    case FaceModality::events: return "events";
  }
  return "?";
}

LayoutConfig::LayoutConfig() {
  for (auto m : kFaceModalities) {
    const char* ext = m == FaceModality::events ? "npy" : "png";
    face_templates[m] = fmt::format("cubemap/{{camera}}/{{face}}/{}/{{frame}}.{}", modality_name(m), ext);
  }
  for (const auto& [name, f] : kFrameFileNames) {
    frame_templates[f] = fmt::format("{}/{{frame}}.json", name);
  }
}

std::string LayoutConfig::frame_name(int frame) const {
  return fmt::format("{:0{}d}", frame, frame_digits);
}

LayoutConfig parse_layout(const json& j) {
  if (!j.is_object()) throw ConfigError("layout must be a JSON object");
  LayoutConfig layout;
  if (j.contains("cameras")) {
    const auto& cams = j.at("cameras");
    if (!cams.is_array() || cams.empty()) throw ConfigError("'cameras' must be a non-empty array");
    layout.cameras.clear();
    for (const auto& c : cams) {
      if (!c.is_string() || c.get<std::string>().empty()) {
        throw ConfigError("'cameras' must list camera names");
      }
      layout.cameras.push_back(c.get<std::string>());
    }
    auto sorted = layout.cameras;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("'cameras' lists a camera twice");
    }
  }
  if (j.contains("frame_digits")) {
    const auto& d = j.at("frame_digits");
    if (!d.is_number_integer() || d.get<int>() < 1 || d.get<int>() > 12) {
      throw ConfigError("'frame_digits' must be an integer in [1, 12]");
    }
    layout.frame_digits = d.get<int>();
  }
  if (j.contains("far_plane")) {
    if (!j.at("far_plane").is_number() || !(j.at("far_plane").get<double>() > 0.0)) {
      throw ConfigError("'far_plane' must be a positive number");
    }
    layout.far_plane = j.at("far_plane").get<double>();
  }
  auto text = [&](const json& v, const std::string& field, bool needs_frame) {
    if (!v.is_string()) throw ConfigError(fmt::format("'{}' must be a string", field));
    auto s = v.get<std::string>();
    if (needs_frame && s.find("{frame}") == std::string::npos) {
      throw ConfigError(fmt::format("'{}' must contain {{frame}}", field));
    }
    return s;
  };
  if (j.contains("templates")) {
    for (const auto& [key, v] : j.at("templates").items()) {
      const std::string field = "templates." + key;
      bool known = false;
      for (auto m : kFaceModalities) {
        if (modality_name(m) == key) {
          layout.face_templates[m] = text(v, field, true);
          known = true;
        }
      }
      if (const auto it = kFrameFileNames.find(key); it != kFrameFileNames.end()) {
        layout.frame_templates[it->second] = text(v, field, true);
        known = true;
      }
      if (key == "calibration") {
        layout.calibration_template = text(v, field, false);
        known = true;
      }
      if (!known) throw ConfigError(fmt::format("'{}': unknown modality", field));
    }
  }
  return layout;
}

json layout_to_json(const LayoutConfig& layout) {
  json templates = json::object();
  for (const auto& [m, t] : layout.face_templates) templates[std::string(modality_name(m))] = t;
  for (const auto& [f, t] : layout.frame_templates) templates[std::string(frame_file_name(f))] = t;
  templates["calibration"] = layout.calibration_template;
  return {{"cameras", layout.cameras},
          {"frame_digits", layout.frame_digits},
          {"far_plane", layout.far_plane},
          {"templates", templates}};
}

fs::path DatasetManifest::face_path(const FrameEntry& f, FaceModality m, std::string_view camera,
                                    CubeFace face) const {
  std::string s = layout.face_templates.at(m);
  s = replace_all(std::move(s), "{camera}", camera);
  s = replace_all(std::move(s), "{face}", face_name(face));
  return root / replace_all(std::move(s), "{frame}", f.id);
}

fs::path DatasetManifest::frame_path(const FrameEntry& f, FrameFile file) const {
  return root / replace_all(layout.frame_templates.at(file), "{frame}", f.id);
}

fs::path DatasetManifest::calibration_path(std::string_view camera) const {
  return root / replace_all(layout.calibration_template, "{camera}", camera);
}

ScanResult scan_dataset(const fs::path& root, const LayoutConfig& layout,
                        const Requirements& required) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw ConfigError(fmt::format("input root {} is not a readable directory", root.string()));
  }

  // Every (template instance) -> regex; a frame id is anything one matches.
  struct Pattern {
    std::regex re;
  };
  std::vector<Pattern> patterns;
  for (const auto& [m, tmpl] : layout.face_templates) {
    for (const auto& cam : layout.cameras) {
      for (auto face : kCubeFaces) {
        std::string s = replace_all(tmpl, "{camera}", cam);
        patterns.push_back({frame_pattern(replace_all(std::move(s), "{face}", face_name(face)))});
      }
    }
  }
  for (const auto& [f, tmpl] : layout.frame_templates) patterns.push_back({frame_pattern(tmpl)});

  std::map<long long, std::set<std::string>> spellings;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    const std::string rel = fs::relative(it->path(), root, ec).generic_string();
    std::smatch m;
    for (const auto& p : patterns) {
      if (std::regex_match(rel, m, p.re)) {
        const std::string id = m[1].str();
        if (id.size() > 15) continue;
        spellings[std::stoll(id)].insert(id);
        break;
      }
    }
  }
  if (ec) throw ConfigError(fmt::format("cannot scan {}: {}", root.string(), ec.message()));

  ScanResult result;
  result.manifest.root = root;
  result.manifest.layout = layout;
  for (const auto& [number, ids] : spellings) {
    if (ids.size() > 1) {
      throw FormatError(fmt::format("frame {} appears under several ids: {}", number,
                                    fmt::join(ids, ", ")));
    }
    FrameEntry entry;
    entry.number = static_cast<int>(number);
    entry.id = *ids.begin();
    std::vector<std::string> reasons;
    for (auto m : kFaceModalities) {
      std::vector<std::string> missing;
      for (const auto& cam : layout.cameras) {
        for (auto face : kCubeFaces) {
          if (!fs::is_regular_file(result.manifest.face_path(entry, m, cam, face), ec)) {
            missing.push_back(fmt::format("{}/{}", cam, face_name(face)));
          }
        }
      }
      if (missing.empty()) {
        entry.face_available.insert(m);
      } else if (required.face.contains(m)) {
        reasons.push_back(fmt::format("missing {} for {}", modality_name(m), fmt::join(missing, ", ")));
      }
    }
    for (const auto& [name, f] : kFrameFileNames) {
      if (fs::is_regular_file(result.manifest.frame_path(entry, f), ec)) {
        entry.frame_available.insert(f);
      } else if (required.frame.contains(f)) {
        reasons.push_back(fmt::format("missing {}", name));
      }
    }
    if (entry.frame_available.contains(FrameFile::meta)) {
      try {
        const json meta = read_json_file(result.manifest.frame_path(entry, FrameFile::meta));
        entry.weather = meta.value("weather", std::string("Default"));
        if (!is_weather_preset(entry.weather)) {
          reasons.push_back(fmt::format("unknown weather tag '{}'", entry.weather));
        }
      } catch (const std::exception& e) {
        reasons.push_back(fmt::format("unreadable meta: {}", e.what()));
      }
    }
    if (reasons.empty()) {
      result.manifest.frames.push_back(std::move(entry));
    } else {
      result.skipped.push_back({entry.id, std::move(reasons)});
    }
  }
  if (result.manifest.frames.empty()) {
    result.warnings.push_back(fmt::format("no complete frames under {}", root.string()));
  }
  return result;
}

void validate_manifest(const DatasetManifest& manifest, const Requirements& required) {
  std::error_code ec;
  auto check = [&](const fs::path& p) {
    if (!fs::is_regular_file(p, ec)) throw ConfigError(fmt::format("missing input file {}", p.string()));
  };
  for (const auto& f : manifest.frames) {
    for (auto m : required.face) {
      for (const auto& cam : manifest.layout.cameras) {
        for (auto face : kCubeFaces) check(manifest.face_path(f, m, cam, face));
      }
    }
    for (auto file : required.frame) check(manifest.frame_path(f, file));
  }
}

}  // namespace fisheyegt
