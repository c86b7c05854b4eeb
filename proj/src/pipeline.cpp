#include "fisheyegt/pipeline.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <mutex>
#include <thread>

#include "fisheyegt/annotations.hpp"
#include "fisheyegt/calibration.hpp"
#include "fisheyegt/classes.hpp"
#include "fisheyegt/events.hpp"
#include "fisheyegt/image_io.hpp"
#include "fisheyegt/instance.hpp"
#include "fisheyegt/lut.hpp"
#include "fisheyegt/motion.hpp"
#include "fisheyegt/parallel.hpp"
#include "fisheyegt/remap.hpp"
#include "fisheyegt/stats.hpp"

namespace fisheyegt {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::lut: return "lut";
    case Stage::rgb: return "rgb";
    case Stage::depth: return "depth";
    case Stage::instance: return "instance";
    case Stage::motion: return "motion";
    case Stage::flow: return "flow";
    case Stage::events: return "events";
    case Stage::bev: return "bev";
    case Stage::stats: return "stats";
  }
  return "?";
}

std::set<Stage> parse_stages(std::string_view list) {
  std::set<Stage> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      out.insert(kAllStages.begin(), kAllStages.end());
    } else if (!item.empty()) {
      bool found = false;
      for (auto s : kAllStages) {
        if (stage_name(s) == item) {
          out.insert(s);
          found = true;
        }
      }
      if (!found) throw ConfigError(fmt::format("stages: unknown stage '{}'", item));
    }
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("stages: no stage selected");
  return out;
}

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  auto path_of = [&](const char* key) {
    if (!j.at(key).is_string()) throw ConfigError(fmt::format("'{}' must be a path string", key));
    const fs::path p = j.at(key).get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  };
  auto num = [&](const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(fmt::format("'{}' must be a number", field));
    return v.get<double>();
  };
  auto count = [&](const json& v, const std::string& field) {
    if (!v.is_number_unsigned()) throw ConfigError(fmt::format("'{}' must be a non-negative integer", field));
    return v.get<std::uint64_t>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "input") {
      c.input = path_of("input");
    } else if (key == "output") {
      c.output = path_of("output");
    } else if (key == "calibration") {
      c.calibration = path_of("calibration");
    } else if (key == "summary") {
      c.summary = path_of("summary");
    } else if (key == "layout") {
      c.layout = v.is_string() ? parse_layout(read_json_file(path_of("layout"))) : parse_layout(v);
    } else if (key == "stages") {
      if (v.is_string()) {
        c.stages = parse_stages(v.get<std::string>());
      } else if (v.is_array()) {
        std::string joined;
        for (const auto& s : v) {
          if (!s.is_string()) throw ConfigError("'stages' must list stage names");
          joined += s.get<std::string>() + ",";
        }
        c.stages = parse_stages(joined);
      } else {
        throw ConfigError("'stages' must be a list or a comma-separated string");
      }
    } else if (key == "threshold") {
      c.threshold = num(v, "threshold");
    } else if (key == "workers") {
      c.workers = static_cast<unsigned>(count(v, "workers"));
    } else if (key == "face_size") {
      c.face_size = static_cast<int>(count(v, "face_size"));
    } else if (key == "seed") {
      c.seed = count(v, "seed");
    } else if (key == "bev") {
      if (!v.is_object()) throw ConfigError("'bev' must be an object");
      for (const auto& [k, _] : v.items()) {
        if (k != "extent_m" && k != "cells") throw ConfigError(fmt::format("'bev.{}': unknown config field", k));
      }
      if (v.contains("extent_m")) c.grid.extent_m = num(v.at("extent_m"), "bev.extent_m");
      if (v.contains("cells")) c.grid.cells = static_cast<int>(count(v.at("cells"), "bev.cells"));
    } else if (key == "flow") {
      if (!v.is_object()) throw ConfigError("'flow' must be an object");
      for (const auto& [k, _] : v.items()) {
        if (k != "max_magnitude") throw ConfigError(fmt::format("'flow.{}': unknown config field", k));
      }
      if (v.contains("max_magnitude")) c.wheel.max_magnitude = num(v.at("max_magnitude"), "flow.max_magnitude");
    } else {
      throw ConfigError(fmt::format("'{}': unknown config field", key));
    }
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_json_file(path), path.parent_path());
}

void validate_config(const PipelineConfig& c) {
  if (c.input.empty()) throw ConfigError("'input': no input root given");
  if (c.output.empty() && !c.dry_run) throw ConfigError("'output': no output root given");
  if (c.stages.empty()) throw ConfigError("'stages': no stage selected");
  if (!(c.threshold >= 0.0) || !std::isfinite(c.threshold)) {
    throw ConfigError(fmt::format("'threshold': must be a finite value >= 0, got {}", c.threshold));
  }
  if (c.face_size < 0 || c.face_size > 8192) throw ConfigError("'face_size': must be in [0, 8192]");
  if (!(c.grid.extent_m > 0.0) || c.grid.cells <= 0 || c.grid.cells > 16384) {
    throw ConfigError("'bev': extent_m must be positive and cells in [1, 16384]");
  }
  if (!(c.wheel.max_magnitude >= 0.0)) throw ConfigError("'flow.max_magnitude': must be >= 0");
}

fs::path output_path(const fs::path& output, std::string_view frame, std::string_view camera,
                     std::string_view modality, std::string_view ext) {
  return output / modality / fmt::format("{}_{}_{}.{}", frame, camera, modality, ext);
}

json RunSummary::to_json() const {
  json skipped_j = json::array();
  for (const auto& s : skipped) skipped_j.push_back({{"frame", s.id}, {"reasons", s.reasons}});
  json failed_j = json::array();
  for (const auto& f : failed) failed_j.push_back({{"frame", f.frame}, {"error", f.message}});
  return {{"frames_total", frames_total},
          {"frames_processed", frames_processed},
          {"frames_resumed", frames_resumed},
          {"skipped", skipped_j},
          {"failed", failed_j},
          {"warnings", warnings},
          {"stage_seconds", stage_seconds},
          {"wall_seconds", wall_seconds},
          {"exit_code", exit_code()}};
}

namespace {

using Clock = std::chrono::steady_clock;

struct Camera {
  std::string name;
  Calibration calib;
  CameraRole role = CameraRole::front;
  Digest fingerprint{};
  std::optional<LookupTable> lut;
  std::optional<ReverseLut> reverse;
};

class StageClock {
 public:
  void add(std::string_view stage, Clock::duration d) {
    const std::lock_guard lock(mutex_);
    seconds_[std::string(stage)] += std::chrono::duration<double>(d).count();
  }
  std::map<std::string, double> seconds() const {
    const std::lock_guard lock(mutex_);
    return seconds_;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, double> seconds_;
};

class StageTimer {
 public:
  StageTimer(StageClock& clock, std::string_view stage)
      : clock_(clock), stage_(stage), start_(Clock::now()) {}
  ~StageTimer() { clock_.add(stage_, Clock::now() - start_); }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  StageClock& clock_;
  std::string_view stage_;
  Clock::time_point start_;
};

Requirements requirements_for(const std::set<Stage>& stages) {
  Requirements r;
  auto face = [&](std::initializer_list<FaceModality> ms) { r.face.insert(ms); };
  auto frame = [&](std::initializer_list<FrameFile> fs_) { r.frame.insert(fs_); };
  for (auto s : stages) {
    switch (s) {
      case Stage::lut: break;
      case Stage::rgb: face({FaceModality::rgb, FaceModality::semantic}); break;
      case Stage::depth: face({FaceModality::depth}); break;
      case Stage::instance:
      case Stage::motion:
        face({FaceModality::depth, FaceModality::semantic});
        frame({FrameFile::boxes, FrameFile::poses});
        break;
      case Stage::flow:
        face({FaceModality::depth, FaceModality::depth_prev, FaceModality::semantic_prev});
        frame({FrameFile::boxes, FrameFile::poses});
        break;
      case Stage::events: face({FaceModality::events}); break;
      case Stage::bev: face({FaceModality::depth, FaceModality::semantic}); break;
      case Stage::stats: frame({FrameFile::boxes, FrameFile::poses}); break;
    }
  }
  return r;
}

bool needs_frames(const std::set<Stage>& stages) {
  return std::any_of(stages.begin(), stages.end(), [](Stage s) { return s != Stage::lut && s != Stage::stats; });
}

Raster8 as_labels(PngImage image, const fs::path& path) {
  auto* r = std::get_if<Raster8>(&image);
  if (r == nullptr) throw FormatError(fmt::format("{}: labels must be 8-bit", path.string()));
  if (r->channels() == 1) {
    r->set_content(RasterContent::label);
    return std::move(*r);
  }
  // Class id in the first (red) channel.
  auto out = Raster8::labels(r->width(), r->height());
  for (int y = 0; y < r->height(); ++y) {
    for (int x = 0; x < r->width(); ++x) out.at(x, y) = r->at(x, y, 0);
  }
  return out;
}

Raster8 as_rgb(PngImage image, const fs::path& path) {
  auto* r = std::get_if<Raster8>(&image);
  if (r == nullptr) throw FormatError(fmt::format("{}: RGB images must be 8-bit", path.string()));
  if (r->channels() == 3) return std::move(*r);
  Raster8 out(r->width(), r->height(), 3);
  const int ch = r->channels();
  for (int y = 0; y < r->height(); ++y) {
    for (int x = 0; x < r->width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = r->at(x, y, ch >= 3 ? c : 0);
    }
  }
  return out;
}

Raster8 scale_mask(Raster8 mask) {
  for (auto& v : mask.data()) v = v ? 255 : 0;
  return mask;
}

Raster16 to_id16(const Raster32& ids) {
  Raster16 out(ids.width(), ids.height());
  const auto src = ids.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] > 0xffff) throw DomainError(fmt::format("object id {} does not fit a 16-bit id map", src[i]));
    dst[i] = static_cast<std::uint16_t>(src[i]);
  }
  return out;
}

fs::path bev_path(const fs::path& output, std::string_view frame, std::string_view layer, std::string_view ext) {
  return output / "bev" / fmt::format("{}_bev_{}.{}", frame, layer, ext);
}

std::string file_digest(const fs::path& p) { return to_hex(sha256(read_file(p))); }

std::string worker_tag() {
  static std::atomic<int> next{0};
  thread_local const int id = next++;
  return fmt::format("w{}", id);
}

class FrameJob {
 public:
  FrameJob(const PipelineConfig& config, const DatasetManifest& manifest, const FrameEntry& frame,
           const std::vector<Camera>& cameras, int face_size, StageClock& clock)
      : cfg_(config), man_(manifest), frame_(frame), cams_(cameras), face_size_(face_size), clock_(clock) {}

  bool selected(Stage s) const { return cfg_.stages.contains(s); }

  void run() {
    std::optional<FrameBoxes> boxes;
    std::optional<FramePoses> poses;
    const bool need_objects = selected(Stage::instance) || selected(Stage::motion) || selected(Stage::flow);
    if (need_objects) {
      boxes = load_boxes(man_.frame_path(frame_, FrameFile::boxes));
      poses = load_poses(man_.frame_path(frame_, FrameFile::poses));
    }
    std::vector<MotionRecord> motions;
    if (poses) {
      for (const auto& r : motion_distances(poses->objects.prev, poses->objects.curr)) {
        if (!poses->objects.spawned.contains(r.object_id)) motions.push_back(r);
      }
    }
    if (selected(Stage::motion)) {
      StageTimer t(clock_, "motion");
      write_motions(track(cfg_.output / "motion" / fmt::format("{}_motions.txt", frame_.id)), motions);
    }

    std::vector<BevLayer> layers;
    std::vector<RasterF> near_depths;
    for (const auto& cam : cams_) {
      process_camera(cam, boxes, poses, motions, layers, near_depths);
    }
    if (selected(Stage::bev)) {
      StageTimer t(clock_, "bev");
      const auto fused = fuse_bev(layers, cfg_.grid);
      const auto palette = label_palette();
      write_palette_png(track(bev_path(cfg_.output, frame_.id, "semantic", "png")), fused.labels, palette);
      write_png(track(bev_path(cfg_.output, frame_.id, "hits", "png")), scale_mask(fused.hits));
      std::vector<BevDepthSource> sources;
      for (std::size_t i = 0; i < cams_.size(); ++i) {
        sources.push_back({&near_depths[i], cams_[i].calib.intr, cams_[i].calib.cam_to_ego});
      }
      write_fras(track(bev_path(cfg_.output, frame_.id, "height", "fras")), bev_height(sources, cfg_.grid));
    }
  }

  const std::vector<fs::path>& written() const { return written_; }
  const json& flow_scales() const { return flow_scales_; }

 private:
  fs::path track(fs::path p) {
    fs::create_directories(p.parent_path());
    written_.push_back(p);
    return p;
  }

  template <typename T, typename Load>
  CubemapFaceSet<T> faces(FaceModality m, const Camera& cam, Load&& load) const {
    CubemapFaceSet<T> set;
    set.face_size = face_size_;
    for (auto face : kCubeFaces) set[face] = load(man_.face_path(frame_, m, cam.name, face));
    set.validate();
    return set;
  }

  CubemapFaceSet<std::uint8_t> label_faces(FaceModality m, const Camera& cam) const {
    return faces<std::uint8_t>(m, cam, [](const fs::path& p) { return as_labels(read_png(p), p); });
  }

  CubemapFaceSet<float> depth_faces(FaceModality m, const Camera& cam) const {
    const double far = man_.layout.far_plane;
    return faces<float>(m, cam, [far](const fs::path& p) { return decode_depth_raster(read_png8(p), far); });
  }

  CubemapFaceSet<std::uint32_t> instance_faces(const CubemapFaceSet<float>& depth,
                                               const CubemapFaceSet<std::uint8_t>& semantic,
                                               const std::vector<OrientedBox3D>& boxes,
                                               const RigidTransform& cam_to_world) const {
    // Box tests must absorb the 24-bit quantization of the simulator depth.
    const double epsilon = kBoxTolerance + 2.0 * man_.layout.far_plane / 16777215.0;
    const PinholeIntrinsics intr = face_intrinsics(face_size_);
    CubemapFaceSet<std::uint32_t> out;
    out.face_size = face_size_;
    for (auto face : kCubeFaces) {
      const RigidTransform face_to_world = cam_to_world * RigidTransform(face_rotation(face), Vec3::Zero());
      out[face] = instance_ids(depth[face], semantic[face], boxes, intr, face_to_world, epsilon);
    }
    return out;
  }

  void process_camera(const Camera& cam, const std::optional<FrameBoxes>& boxes,
                      const std::optional<FramePoses>& poses, const std::vector<MotionRecord>& motions,
                      std::vector<BevLayer>& layers, std::vector<RasterF>& near_depths) {
    const LookupTable& lut = *cam.lut;
    const auto& id = frame_.id;
    const bool want_semantic = selected(Stage::rgb) || selected(Stage::bev);
    const bool want_depth = selected(Stage::depth) || selected(Stage::bev) || selected(Stage::instance) ||
                            selected(Stage::motion) || selected(Stage::flow);

    std::optional<CubemapFaceSet<std::uint8_t>> sem_faces;
    std::optional<CubemapFaceSet<float>> depth_faces_curr;
    if (want_semantic || selected(Stage::instance) || selected(Stage::motion)) {
      sem_faces = label_faces(FaceModality::semantic, cam);
    }
    if (want_depth) depth_faces_curr = depth_faces(FaceModality::depth, cam);

    Raster8 semantic;
    if (want_semantic) {
      StageTimer t(clock_, "rgb");
      semantic = remap(lut, *sem_faces, Interpolation::nearest, kNoLabel);
    }
    if (selected(Stage::rgb)) {
      StageTimer t(clock_, "rgb");
      auto rgb = faces<std::uint8_t>(FaceModality::rgb, cam, [](const fs::path& p) { return as_rgb(read_png(p), p); });
      write_png(track(output_path(cfg_.output, id, cam.name, "rgb", "png")), remap(lut, rgb, Interpolation::bilinear));
      write_palette_png(track(output_path(cfg_.output, id, cam.name, "semantic", "png")), semantic, label_palette());
    }

    RasterF near_depth;
    if (want_depth) {
      StageTimer t(clock_, "depth");
      if (selected(Stage::depth)) {
        write_fras(track(output_path(cfg_.output, id, cam.name, "depth", "fras")), remap_depth(lut, *depth_faces_curr));
      }
      near_depth = remap_depth(lut, *depth_faces_curr, Interpolation::nearest);
    }

    if (selected(Stage::instance) || selected(Stage::motion)) {
      StageTimer t(clock_, "instance");
      const auto [pose_prev, pose_curr] = poses->camera_poses(cam.name, cam.calib.cam_to_ego);
      const auto ids_faces = instance_faces(*depth_faces_curr, *sem_faces, boxes->curr_boxes(), pose_curr);
      const Raster32 ids = remap(lut, ids_faces, Interpolation::nearest, 0u);
      if (selected(Stage::instance)) {
        write_png(track(output_path(cfg_.output, id, cam.name, "instance", "png")), to_id16(ids));
        write_png(track(output_path(cfg_.output, id, cam.name, "instance_color", "png")), colorize_instances(ids, cfg_.seed));
      }
      if (selected(Stage::motion)) {
        StageTimer tm(clock_, "motion");
        write_png(track(output_path(cfg_.output, id, cam.name, "motion", "png")),
                  scale_mask(motion_mask(ids, motions, cfg_.threshold)));
      }
    }

    if (selected(Stage::flow)) {
      StageTimer t(clock_, "flow");
      const auto [pose_prev, pose_curr] = poses->camera_poses(cam.name, cam.calib.cam_to_ego);
      const auto dprev_faces = depth_faces(FaceModality::depth_prev, cam);
      const auto sprev_faces = label_faces(FaceModality::semantic_prev, cam);
      const auto ids_prev = remap(lut, instance_faces(dprev_faces, sprev_faces, boxes->prev_boxes(), pose_prev),
                                  Interpolation::nearest, 0u);
      const RasterF depth_prev = remap_depth(lut, dprev_faces, Interpolation::nearest);
      const CameraModel model = cam.calib.intr;
      const auto scene = scene_flow(depth_prev, ids_prev, model, pose_prev, poses->objects);
      FlowOptions options;
      options.depth_curr = &near_depth;
      const FlowField flow = optical_flow(scene, model, pose_prev, pose_curr, options);
      write_fras(track(output_path(cfg_.output, id, cam.name, "flow", "fras")), flow.flow);
      write_png(track(output_path(cfg_.output, id, cam.name, "flow_color", "png")), flow_colorize(flow, cfg_.wheel));
      write_png(track(output_path(cfg_.output, id, cam.name, "flow_occlusion", "png")), scale_mask(flow.occluded));
      flow_scales_[cam.name] = flow_color_scale(flow, cfg_.wheel);
    }

    if (selected(Stage::events)) {
      StageTimer t(clock_, "events");
      std::array<EventStream, kFaceCount> streams;
      for (auto face : kCubeFaces) {
        streams[static_cast<int>(face)] =
            read_events_npy(man_.face_path(frame_, FaceModality::events, cam.name, face), face_size_, face_size_);
      }
      const auto result = remap_events(streams, *cam.reverse);
      if (result.rejected > 0) {
        spdlog::warn("[{}] frame {} camera {}: {} events outside their face were dropped", worker_tag(), id,
                     cam.name, result.rejected);
      }
      const auto& ev = result.stream.events;
      write_events_npy(track(output_path(cfg_.output, id, cam.name, "events", "npy")), ev);
      const std::int64_t t0 = ev.empty() ? 0 : ev.front().t;
      const std::int64_t t1 = ev.empty() ? 0 : ev.back().t;
      write_png(track(output_path(cfg_.output, id, cam.name, "events_render", "png")), render_events(result.stream, t0, t1));
    }

    if (selected(Stage::bev)) {
      StageTimer t(clock_, "bev");
      layers.push_back(ipm_project(semantic, cam.calib.intr, cam.calib.cam_to_ego, cfg_.grid, cam.role));
    }
    near_depths.push_back(std::move(near_depth));
  }

  const PipelineConfig& cfg_;
  const DatasetManifest& man_;
  const FrameEntry& frame_;
  const std::vector<Camera>& cams_;
  int face_size_;
  StageClock& clock_;
  std::vector<fs::path> written_;
  json flow_scales_ = json::object();
};

json config_fingerprint_json(const PipelineConfig& c, int face_size) {
  std::vector<std::string> stages;
  for (auto s : c.stages) stages.emplace_back(stage_name(s));
  return {{"version", kToolkitVersion},
          {"stages", stages},
          {"threshold", c.threshold},
          {"seed", c.seed},
          {"face_size", face_size},
          {"bev", {{"extent_m", c.grid.extent_m}, {"cells", c.grid.cells}}},
          {"flow_max_magnitude", c.wheel.max_magnitude},
          {"layout", layout_to_json(c.layout)}};
}

std::string frame_input_fingerprint(const PipelineConfig& c, const DatasetManifest& man, const FrameEntry& f,
                                    const std::vector<Camera>& cams, int face_size, const Requirements& req) {
  Sha256 h;
  h.update(config_fingerprint_json(c, face_size).dump());
  for (const auto& cam : cams) h.update(fmt::format("|{}:{}", cam.name, to_hex(cam.fingerprint)));
  auto add = [&](const fs::path& p) {
    h.update("|" + fs::relative(p, man.root).generic_string() + ":");
    h.update(std::span<const std::byte>(read_file(p)));
  };
  for (auto m : req.face) {
    for (const auto& cam : cams) {
      for (auto face : kCubeFaces) add(man.face_path(f, m, cam.name, face));
    }
  }
  for (auto file : req.frame) add(man.frame_path(f, file));
  return to_hex(h.finish());
}

bool outputs_current(const fs::path& meta_path, const std::string& fingerprint, const fs::path& output) {
  std::error_code ec;
  if (!fs::is_regular_file(meta_path, ec)) return false;
  try {
    const json meta = read_json_file(meta_path);
    if (meta.value("input_fingerprint", std::string()) != fingerprint) return false;
    for (const auto& [rel, digest] : meta.at("outputs").items()) {
      const fs::path p = output / rel;
      if (!fs::is_regular_file(p, ec) || file_digest(p) != digest.get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

int detect_face_size(const DatasetManifest& man, const std::string& camera) {
  for (auto m : kFaceModalities) {
    for (const auto& f : man.frames) {
      if (!f.face_available.contains(m) || m == FaceModality::events) continue;
      const auto img = read_png(man.face_path(f, m, camera, CubeFace::front));
      return std::visit([](const auto& r) { return r.width(); }, img);
    }
  }
  return 0;
}

void run_stats(const PipelineConfig& cfg, const DatasetManifest& man, const std::vector<Camera>& cams,
               RunSummary& summary) {
  std::vector<FrameObjects> objects;
  std::vector<fs::path> label_files;
  std::error_code ec;
  for (const auto& f : man.frames) {
    objects.push_back(frame_objects(load_boxes(man.frame_path(f, FrameFile::boxes)),
                                    load_poses(man.frame_path(f, FrameFile::poses))));
    for (const auto& cam : cams) {
      const fs::path p = output_path(cfg.output, f.id, cam.name, "semantic", "png");
      if (fs::is_regular_file(p, ec)) {
        label_files.push_back(p);
      } else {
        summary.warnings.push_back(fmt::format("stats: {} missing; run the rgb stage first", p.string()));
      }
    }
    const fs::path bev = bev_path(cfg.output, f.id, "semantic", "png");
    if (fs::is_regular_file(bev, ec)) label_files.push_back(bev);
  }
  const ObjectStats stats = object_statistics(objects);
  ClassHistogram hist;
  for (const auto& p : label_files) {
    ClassHistogram one;
    one.add(read_png8(p));
    if (one.unknown > 0) {
      summary.warnings.push_back(fmt::format("stats: {} pixels with unknown class ids in {} counted as unlabeled",
                                             one.unknown, p.string()));
    }
    hist.merge(one);
  }
  const fs::path dir = cfg.output / "stats";
  fs::create_directories(dir);
  const std::string table = format_object_table(stats);
  write_file(dir / "objects.txt", std::as_bytes(std::span(table)));
  write_json_file(dir / "objects.json", object_stats_to_json(stats));
  const std::string csv = histogram_csv(hist);
  write_file(dir / "class_histogram.csv", std::as_bytes(std::span(csv)));
  json hj = histogram_to_json(hist);
  hj["rasters"] = label_files.size();
  write_json_file(dir / "class_histogram.json", hj);
}

}  // namespace

RunSummary run_pipeline(const PipelineConfig& config) {
  const auto start = Clock::now();
  validate_config(config);
  RunSummary summary;
  StageClock clock;
  const auto& stages = config.stages;
  const Requirements req = requirements_for(stages);

  // Configuration and dependency checks; nothing is written before these pass.
  const ScanResult probe = scan_dataset(config.input, config.layout, {});
  if (stages.contains(Stage::flow)) {
    const bool any_poses = std::any_of(probe.manifest.frames.begin(), probe.manifest.frames.end(),
                                       [](const FrameEntry& f) { return f.frame_available.contains(FrameFile::poses); });
    if (!any_poses) {
      throw ConfigError(fmt::format("object_transforms: the flow stage needs per-frame pose files ({}), none found",
                                    config.layout.frame_templates.at(FrameFile::poses)));
    }
  }
  ScanResult scan = scan_dataset(config.input, config.layout, req);
  DatasetManifest& man = scan.manifest;
  summary.skipped = scan.skipped;
  summary.warnings = scan.warnings;
  summary.frames_total = man.frames.size();
  validate_manifest(man, req);

  std::vector<Camera> cams;
  for (std::size_t i = 0; i < config.layout.cameras.size(); ++i) {
    const auto& name = config.layout.cameras[i];
    const fs::path path = config.calibration.empty() ? man.calibration_path(name)
                                                     : config.calibration / fmt::format("{}.json", name);
    Camera cam{name, load_calibration(path), CameraRole::front, {}, std::nullopt, std::nullopt};
    constexpr std::array<CameraRole, 4> fallback = {CameraRole::front, CameraRole::rear, CameraRole::left,
                                                    CameraRole::right};
    cam.role = cam.calib.role.value_or(parse_role(name).value_or(fallback[i % 4]));
    cam.fingerprint = calibration_fingerprint(cam.calib);
    cams.push_back(std::move(cam));
  }

  int face_size = config.face_size;
  if (face_size == 0 && !man.frames.empty() && (needs_frames(stages) || stages.contains(Stage::lut))) {
    face_size = detect_face_size(man, cams.front().name);
  }
  if (face_size == 0) face_size = kDefaultFaceSize;

  const bool frame_stages = needs_frames(stages);
  if (!stages.contains(Stage::lut) && frame_stages) {
    for (auto& cam : cams) {
      const fs::path p = config.output / "luts" / fmt::format("{}.flut", cam.name);
      std::error_code ec;
      if (!fs::is_regular_file(p, ec)) {
        throw ConfigError(fmt::format("lut: no lookup table for camera '{}' at {}; add the lut stage", cam.name,
                                      p.string()));
      }
    }
  }
  if (config.dry_run) {
    spdlog::info("dry run: {} complete frames, {} skipped, {} cameras, face size {}", man.frames.size(),
                 scan.skipped.size(), cams.size(), face_size);
    summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return summary;
  }

  set_worker_count(config.workers);
  const unsigned workers = worker_count();
  fs::create_directories(config.output);

  // LUTs: built, reused when current, or loaded.
  {
    StageTimer t(clock, "lut");
    for (auto& cam : cams) {
      const fs::path p = config.output / "luts" / fmt::format("{}.flut", cam.name);
      std::error_code ec;
      if (stages.contains(Stage::lut)) {
        if (config.resume && fs::is_regular_file(p, ec)) {
          auto lut = load_lut(p);
          if (lut.fingerprint() == cam.fingerprint && lut.face_size() == face_size) cam.lut = std::move(lut);
        }
        if (!cam.lut) {
          cam.lut = build_lut(cam.calib.intr, face_size, cam.fingerprint);
          fs::create_directories(p.parent_path());
          save_lut(p, *cam.lut);
          spdlog::info("camera {}: LUT {}x{} from {}-pixel faces, {} valid pixels", cam.name, cam.lut->width(),
                       cam.lut->height(), face_size, cam.lut->valid_count());
        }
      } else if (frame_stages) {
        cam.lut = load_lut(p);
        if (auto w = fingerprint_mismatch(*cam.lut, cam.fingerprint)) {
          summary.warnings.push_back(fmt::format("camera {}: {}", cam.name, *w));
          spdlog::warn("camera {}: {}", cam.name, *w);
        }
        if (cam.lut->face_size() != face_size) {
          throw ConfigError(fmt::format("face_size: LUT for '{}' expects {} pixel faces, input has {}", cam.name,
                                        cam.lut->face_size(), face_size));
        }
      }
      if (stages.contains(Stage::events) && cam.lut) cam.reverse = invert_lut(*cam.lut);
    }
  }

  if (frame_stages) {
    std::vector<std::optional<FrameFailure>> failures(man.frames.size());
    std::vector<char> resumed(man.frames.size(), 0);
    std::atomic<std::size_t> next{0};
    const unsigned pool = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(man.frames.size())));
    const unsigned inner = std::max(1u, workers / pool);
    auto work = [&] {
      ScopedWorkerCount scoped(inner);
      for (std::size_t i = next++; i < man.frames.size(); i = next++) {
        const FrameEntry& f = man.frames[i];
        try {
          const std::string fingerprint = frame_input_fingerprint(config, man, f, cams, face_size, req);
          const fs::path meta_path = config.output / "meta" / fmt::format("{}.json", f.id);
          if (config.resume && outputs_current(meta_path, fingerprint, config.output)) {
            resumed[i] = 1;
            spdlog::info("[{}] frame {}: outputs up to date", worker_tag(), f.id);
            continue;
          }
          FrameJob job(config, man, f, cams, face_size, clock);
          job.run();
          json outputs = json::object();
          for (const auto& p : job.written()) {
            outputs[fs::relative(p, config.output).generic_string()] = file_digest(p);
          }
          json luts = json::object();
          for (const auto& cam : cams) luts[cam.name] = to_hex(cam.lut->fingerprint());
          std::vector<std::string> stage_names;
          for (auto s : stages) stage_names.emplace_back(stage_name(s));
          json meta{{"toolkit_version", kToolkitVersion},
                    {"frame", f.id},
                    {"weather", f.weather},
                    {"stages", stage_names},
                    {"face_size", face_size},
                    {"lut_fingerprints", luts},
                    {"thresholds",
                     {{"motion_m", config.threshold},
                      {"box_tolerance_m", kBoxTolerance},
                      {"flow_occlusion_margin_m", FlowOptions{}.occlusion_margin}}},
                    {"flow_wheel",
                     {{"hue_zero", "+x (red)"},
                      {"hue", "atan2(dy, dx) in image coordinates, y down"},
                      {"saturation", "min(|flow| / max_magnitude, 1)"},
                      {"value", 1.0},
                      {"invalid", "black"},
                      {"max_magnitude", config.wheel.max_magnitude > 0.0 ? json(config.wheel.max_magnitude) : json("auto")},
                      {"scale_used", job.flow_scales()}}},
                    {"bev_grid",
                     {{"extent_m", config.grid.extent_m},
                      {"cells", config.grid.cells},
                      {"resolution_m", config.grid.resolution()},
                      {"axes", "row 0 = +X far edge, column 0 = +Y far edge"}}},
                    {"session_seed", config.seed},
                    {"input_fingerprint", fingerprint},
                    {"outputs", outputs}};
          fs::create_directories(meta_path.parent_path());
          write_json_file(meta_path, meta);
          spdlog::info("[{}] frame {}: {} files written", worker_tag(), f.id, job.written().size());
        } catch (const std::exception& e) {
          failures[i] = FrameFailure{f.id, e.what()};
          spdlog::error("[{}] frame {}: {}", worker_tag(), f.id, e.what());
        }
      }
    };
    {
      std::vector<std::jthread> threads;
      for (unsigned w = 1; w < pool; ++w) threads.emplace_back(work);
      work();
    }
    for (std::size_t i = 0; i < man.frames.size(); ++i) {
      if (failures[i]) {
        summary.failed.push_back(*failures[i]);
      } else if (resumed[i]) {
        ++summary.frames_resumed;
      } else {
        ++summary.frames_processed;
      }
    }
  }

  if (stages.contains(Stage::stats)) {
    StageTimer t(clock, "stats");
    try {
      run_stats(config, man, cams, summary);
    } catch (const std::exception& e) {
      summary.failed.push_back({"stats", e.what()});
      spdlog::error("stats: {}", e.what());
    }
  }

  summary.stage_seconds = clock.seconds();
  summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return summary;
}

}  // namespace fisheyegt
