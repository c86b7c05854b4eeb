// Batch front end: fisheyegt <subcommand> [options].
//
// Every option can also come from an environment variable with the
// FISHEYEGT_ prefix (FISHEYEGT_INPUT, FISHEYEGT_WORKERS, ...). Precedence:
// command-line flag, then environment, then --config file, then defaults.
// Exit codes: 0 success, 1 some frames failed, 2 configuration error.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <array>
#include <filesystem>
#include <iostream>

#include "fisheyegt/annotations.hpp"
#include "fisheyegt/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fisheyegt;

struct Subcommand {
  const char* name;
  const char* help;
  const char* stages;
};

constexpr std::array<Subcommand, 7> kSubcommands = {{
    {"build-lut", "Build the fisheye lookup table of every camera", "lut"},
    {"render", "Remap RGB, semantic and depth faces into fisheye images", "rgb,depth"},
    {"gen-gt", "Instance, motion and optical flow ground truth", "instance,motion,flow"},
    {"remap-events", "Remap per-face event streams into fisheye streams", "events"},
    {"bev", "Bird's-eye-view semantics and height from all cameras", "bev"},
    {"stats", "Class histogram and per-class object statistics", "stats"},
    {"all", "Every stage in dependency order", "all"},
}};

void setup_logging(const std::string& level) {
  auto logger = spdlog::stderr_logger_mt("fisheyegt");
  logger->set_pattern("%H:%M:%S.%e %^%l%$ %v");
  logger->set_level(spdlog::level::from_str(level));
  logger->flush_on(spdlog::level::info);
  spdlog::set_default_logger(logger);
}

fs::path default_summary(const fs::path& output) {
  fs::path p = output.lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  p += ".summary.json";
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisheye ground-truth toolkit", "fisheyegt"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolkitVersion));

  std::string config_path, input, output, calibration, stages, summary, log_level = "info";
  double threshold = 0.0;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  int face_size = 0;
  bool dry_run = false;
  bool resume = false;

  auto* o_config = app.add_option("--config", config_path, "JSON pipeline config")->envname("FISHEYEGT_CONFIG");
  auto* o_input = app.add_option("--input", input, "Dataset root")->envname("FISHEYEGT_INPUT");
  auto* o_output = app.add_option("--output", output, "Output root")->envname("FISHEYEGT_OUTPUT");
  auto* o_calib = app.add_option("--calibration", calibration, "Directory of <camera>.json calibrations")
                      ->envname("FISHEYEGT_CALIBRATION");
  auto* o_stages = app.add_option("--stages", stages, "Comma-separated stages, overrides the subcommand")
                       ->envname("FISHEYEGT_STAGES");
  auto* o_threshold =
      app.add_option("--threshold", threshold, "Motion threshold in meters (default 0.5)")->envname("FISHEYEGT_THRESHOLD");
  auto* o_workers =
      app.add_option("--workers", workers, "Worker threads, 0 = all cores")->envname("FISHEYEGT_WORKERS");
  auto* o_seed = app.add_option("--seed", seed, "Session seed for instance colors")->envname("FISHEYEGT_SEED");
  auto* o_face = app.add_option("--face-size", face_size, "Cubemap face side, 0 = from the input")
                     ->envname("FISHEYEGT_FACE_SIZE");
  auto* o_summary =
      app.add_option("--summary", summary, "Run summary JSON (default <output>.summary.json)")->envname("FISHEYEGT_SUMMARY");
  app.add_flag("--dry-run", dry_run, "Validate config and manifest without writing")->envname("FISHEYEGT_DRY_RUN");
  app.add_flag("--resume", resume, "Skip frames whose outputs are current")->envname("FISHEYEGT_RESUME");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->envname("FISHEYEGT_LOG_LEVEL")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::vector<CLI::App*> subs;
  for (const auto& s : kSubcommands) subs.push_back(app.add_subcommand(s.name, s.help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  setup_logging(log_level);

  try {
    PipelineConfig cfg;
    bool config_stages = false;
    if (o_config->count() > 0) {
      const auto j = read_json_file(config_path);
      cfg = parse_config(j, fs::path(config_path).parent_path());
      config_stages = j.is_object() && j.contains("stages");
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const bool is_all = std::string_view(kSubcommands[i].name) == "all";
      if (!is_all || !config_stages) cfg.stages = parse_stages(kSubcommands[i].stages);
    }
    if (o_stages->count() > 0) cfg.stages = parse_stages(stages);
    if (o_input->count() > 0) cfg.input = input;
    if (o_output->count() > 0) cfg.output = output;
    if (o_calib->count() > 0) cfg.calibration = calibration;
    if (o_threshold->count() > 0) cfg.threshold = threshold;
    if (o_workers->count() > 0) cfg.workers = workers;
    if (o_seed->count() > 0) cfg.seed = seed;
    if (o_face->count() > 0) cfg.face_size = face_size;
    if (o_summary->count() > 0) cfg.summary = summary;
    cfg.dry_run = cfg.dry_run || dry_run;
    cfg.resume = cfg.resume || resume;

    const RunSummary result = run_pipeline(cfg);
    for (const auto& w : result.warnings) spdlog::warn("{}", w);
    for (const auto& s : result.skipped) {
      spdlog::warn("skipped frame {}: {}", s.id, fmt::format("{}", fmt::join(s.reasons, "; ")));
    }
    spdlog::info("{} frames: {} processed, {} up to date, {} skipped, {} failed in {:.2f} s", result.frames_total,
                 result.frames_processed, result.frames_resumed, result.skipped.size(), result.failed.size(),
                 result.wall_seconds);
    if (cfg.dry_run) {
      std::cout << result.to_json().dump(2) << "\n";
    } else {
      const fs::path summary_path = cfg.summary.empty() ? default_summary(cfg.output) : cfg.summary;
      write_json_file(summary_path, result.to_json());
    }
    return result.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
}
