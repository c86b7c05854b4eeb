#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fisheyegt/cubemap.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

inline constexpr double kDefaultFarPlane = 1000.0;

/// Plane depth from the simulator's 24-bit RGB code:
/// (R + 256 G + 65536 B) / (2^24 - 1) * far_plane.
/// Throws FormatError unless the raster has three channels.
RasterF decode_depth_raster(const Raster8& encoded, double far_plane = kDefaultFarPlane);
/// Inverse of decode_depth_raster, rounding to the nearest code; values
/// beyond [0, far_plane] (and NaN) saturate.
Raster8 encode_depth_raster(const RasterF& depth, double far_plane = kDefaultFarPlane);

/// The nine simulator weather presets.
inline constexpr std::array<std::string_view, 9> kWeatherPresets = {
    "ClearNoon", "ClearSunset", "CloudyNoon", "CloudySunset", "Default",
    "WetCloudyNoon", "WetCloudySunset", "WetNoon", "WetSunset"};
bool is_weather_preset(std::string_view tag) noexcept;

/// Input files that exist per camera and cube face.
enum class FaceModality { rgb, depth, semantic, rgb_prev, depth_prev, semantic_prev, events };
inline constexpr std::array<FaceModality, 7> kFaceModalities = {
    FaceModality::rgb,      FaceModality::depth,         FaceModality::semantic,
    FaceModality::rgb_prev, FaceModality::depth_prev,    FaceModality::semantic_prev,
    FaceModality::events};
std::string_view modality_name(FaceModality m) noexcept;

/// Files that exist once per frame.
enum class FrameFile { boxes, poses, meta };

/// Path templates relative to the input root. Placeholders: {camera},
/// {face}, {frame}. A JSON layout file may override any of them.
struct LayoutConfig {
  std::vector<std::string> cameras{"front", "rear", "left", "right"};
  int frame_digits = 5;
  double far_plane = kDefaultFarPlane;
  std::map<FaceModality, std::string> face_templates;
  std::map<FrameFile, std::string> frame_templates;
  std::string calibration_template = "calibration/{camera}.json";

  LayoutConfig();
  std::string frame_name(int frame) const;
};

LayoutConfig parse_layout(const nlohmann::json& j);
nlohmann::json layout_to_json(const LayoutConfig& layout);

/// Modalities a run needs; frames lacking any of them are skipped.
struct Requirements {
  std::set<FaceModality> face;
  std::set<FrameFile> frame;
};

struct FrameEntry {
  int number = 0;
  std::string id;  // as spelled on disk
  std::string weather = "Default";
  std::set<FaceModality> face_available;  // present for every camera and face
  std::set<FrameFile> frame_available;
};

struct DatasetManifest {
  std::filesystem::path root;
  LayoutConfig layout;
  std::vector<FrameEntry> frames;  // ascending frame number

  std::filesystem::path face_path(const FrameEntry& f, FaceModality m, std::string_view camera,
                                  CubeFace face) const;
  std::filesystem::path frame_path(const FrameEntry& f, FrameFile file) const;
  std::filesystem::path calibration_path(std::string_view camera) const;
};

struct SkippedFrame {
  std::string id;
  std::vector<std::string> reasons;
};

struct ScanResult {
  DatasetManifest manifest;
  std::vector<SkippedFrame> skipped;
  std::vector<std::string> warnings;
};

/// Enumerates frames by matching every template against the files under
/// `root`. Frames missing a required file, or with an unknown weather tag,
/// go to the skipped report. Throws FormatError when two spellings share a
/// frame number and ConfigError when the root is unreadable.
ScanResult scan_dataset(const std::filesystem::path& root, const LayoutConfig& layout,
                        const Requirements& required);

/// Throws ConfigError naming the first referenced frame file that is
/// missing. Calibrations are checked where they are loaded.
void validate_manifest(const DatasetManifest& manifest, const Requirements& required);

}  // namespace fisheyegt
