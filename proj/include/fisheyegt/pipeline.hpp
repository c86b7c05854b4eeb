#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fisheyegt/bev.hpp"
#include "fisheyegt/dataset.hpp"
#include "fisheyegt/flow.hpp"

namespace fisheyegt {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

enum class Stage { lut, rgb, depth, instance, motion, flow, events, bev, stats };
inline constexpr std::array<Stage, 9> kAllStages = {Stage::lut,    Stage::rgb,    Stage::depth,
                                                     Stage::instance, Stage::motion, Stage::flow,
                                                     Stage::events, Stage::bev,    Stage::stats};
std::string_view stage_name(Stage s) noexcept;
/// Comma-separated stage names, or "all". Throws ConfigError.
std::set<Stage> parse_stages(std::string_view list);

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  /// Directory of {camera}.json files; empty = the layout's calibration template.
  std::filesystem::path calibration;
  LayoutConfig layout;
  std::set<Stage> stages{kAllStages.begin(), kAllStages.end()};
  double threshold = 0.5;
  unsigned workers = 0;  // 0 = hardware concurrency
  BevGrid grid;
  int face_size = 0;     // 0 = taken from the input faces
  std::uint64_t seed = 0;
  FlowWheel wheel;
  bool dry_run = false;
  bool resume = false;
  /// Where the run summary goes; empty = "<output>.summary.json".
  std::filesystem::path summary;
};

/// Reads a JSON config file; fields left out keep their defaults. A
/// "layout" member may be an object or a path relative to the file.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Field-level checks that need no I/O. Throws ConfigError naming the field.
void validate_config(const PipelineConfig& config);

struct FrameFailure {
  std::string frame;
  std::string message;
};

struct RunSummary {
  std::size_t frames_total = 0;
  std::size_t frames_processed = 0;
  std::size_t frames_resumed = 0;  // skipped because outputs were up to date
  std::vector<SkippedFrame> skipped;
  std::vector<FrameFailure> failed;
  std::vector<std::string> warnings;
  std::map<std::string, double> stage_seconds;
  double wall_seconds = 0.0;

  int exit_code() const noexcept { return failed.empty() ? 0 : 1; }
  nlohmann::json to_json() const;
};

/// Runs the selected stages over every complete frame. Configuration and
/// dependency problems throw ConfigError before any output is touched;
/// per-frame errors are collected in the summary.
RunSummary run_pipeline(const PipelineConfig& config);

/// Output file of a per-camera modality: <output>/<modality>/<frame>_<camera>_<modality>.<ext>.
std::filesystem::path output_path(const std::filesystem::path& output, std::string_view frame,
                                  std::string_view camera, std::string_view modality,
                                  std::string_view ext);

}  // namespace fisheyegt
