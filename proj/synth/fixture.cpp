#include "fixture.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fisheyegt/dataset.hpp"
#include "fisheyegt/image_io.hpp"
#include "fisheyegt/parallel.hpp"

namespace fisheyegt::synth {
namespace fs = std::filesystem;

namespace {

constexpr double kFrameSeconds = 0.05;
constexpr std::int64_t kFrameMicros = 50000;

Mat3 yaw(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }
Mat3 pitch(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }

Rgb shade(SemanticClass c, ObjectId id) {
  Rgb base = class_info(c).color;
  const int d = static_cast<int>(id % 5) * 12 - 24;
  auto adj = [d](std::uint8_t v) { return static_cast<std::uint8_t>(std::clamp(v + d, 0, 255)); };
  return {adj(base.r), adj(base.g), adj(base.b)};
}

struct Actor {
  ObjectId id;
  SemanticClass cls;
  Vec3 half;
  bool dynamic;
  int first_frame;
  // Pose at frame k.
  RigidTransform (*pose)(int k);
};

const std::vector<Actor>& actors() {
  static const std::vector<Actor> list = {
      {1, SemanticClass::four_wheeler, {2.2, 0.9, 0.75}, false, -1,
       [](int) { return RigidTransform(yaw(0.2), {10.0, 4.0, 0.75}); }},
      {2, SemanticClass::four_wheeler, {2.2, 0.9, 0.75}, true, -1,
       [](int k) { return RigidTransform(Mat3::Identity(), {2.0 + 1.75 * k, -3.5, 0.75}); }},
      {3, SemanticClass::pedestrian, {0.3, 0.3, 0.9}, true, -1,
       [](int k) { return RigidTransform(yaw(1.0), {6.0 + 0.25 * k, 2.2, 0.9}); }},
      {4, SemanticClass::two_wheeler, {0.9, 0.3, 0.7}, true, -1,
       [](int k) { return RigidTransform(Mat3::Identity(), {-4.0 + 0.5 * k, 2.5, 0.7}); }},
      {5, SemanticClass::four_wheeler, {2.2, 0.9, 0.75}, true, 5,
       [](int k) { return RigidTransform(Mat3::Identity(), {15.0 + k, 0.0, 0.75}); }},
      {6, SemanticClass::pedestrian, {0.35, 0.25, 0.9}, true, -1,
       [](int k) { return RigidTransform(yaw(0.1 * k), {3.0 + k, -2.5, 0.9}); }},
  };
  return list;
}

// Buildings, sidewalks with a 0.12 m curb and a few poles; never in the box files.
std::vector<Box> scenery() {
  std::vector<Box> out;
  ObjectId id = 1000;
  for (int i = -3; i <= 6; ++i) {
    for (double side : {-1.0, 1.0}) {
      const Vec3 c(i * 9.0, side * 10.0, 4.0 + (i % 3));
      out.push_back({OrientedBox3D(id, static_cast<std::uint8_t>(SemanticClass::building), c,
                                   {3.5, 1.5, 4.0 + (i % 3)}),
                     shade(SemanticClass::building, id)});
      ++id;
      const Vec3 p(i * 9.0 + 4.5, side * 6.8, 1.5);
      out.push_back({OrientedBox3D(id, static_cast<std::uint8_t>(SemanticClass::pole), p, {0.1, 0.1, 1.5}),
                     shade(SemanticClass::pole, id)});
      ++id;
    }
  }
  for (double side : {-1.0, 1.0}) {
    out.push_back({OrientedBox3D(id, static_cast<std::uint8_t>(SemanticClass::sidewalk), {15.0, side * 7.0, 0.06},
                                 {45.0, 1.5, 0.06}),
                   shade(SemanticClass::sidewalk, id)});
    ++id;
  }
  return out;
}

Scene scene_at(int k) {
  Scene s;
  s.ground = Ground{2.0};
  s.boxes = scenery();
  for (const auto& a : actors()) {
    if (k < a.first_frame) continue;
    const RigidTransform p = a.pose(k);
    s.boxes.push_back({OrientedBox3D(a.id, static_cast<std::uint8_t>(a.cls), p.translation(), a.half, p.rotation()),
                       shade(a.cls, a.id)});
  }
  return s;
}

RigidTransform ego_at(int k) { return RigidTransform(Mat3::Identity(), {1.0 * k, 0.0, 0.0}); }

Raster8 to_label_png(const Raster8& labels) {
  Raster8 out(labels.width(), labels.height());
  std::copy(labels.data().begin(), labels.data().end(), out.data().begin());
  return out;
}

}  // namespace

FisheyeIntrinsics fixture_intrinsics(double scale) {
  if (!(scale > 0.0)) throw DomainError("fixture scale must be positive");
  const int w = static_cast<int>(std::lround(1280 * scale));
  const int h = static_cast<int>(std::lround(966 * scale));
  return FisheyeIntrinsics({339.749 * scale, -31.988 * scale, 48.275 * scale, -7.201 * scale},
                           Vec2(w / 2.0, h / 2.0), w, h);
}

std::vector<Calibration> fixture_calibrations(const FixtureOptions& options) {
  const auto intr = fixture_intrinsics(options.scale);
  struct Mount {
    const char* name;
    CameraRole role;
    double yaw_rad;
    double pitch_rad;
    Vec3 t;
  };
  const double deg = std::numbers::pi / 180.0;
  const std::array<Mount, 4> mounts = {{
      {"front", CameraRole::front, 0.0, 15 * deg, {3.7, 0.0, 0.6}},
      {"rear", CameraRole::rear, 180 * deg, 25 * deg, {-1.0, 0.0, 0.9}},
      {"left", CameraRole::left, 90 * deg, 40 * deg, {2.0, 1.0, 1.0}},
      {"right", CameraRole::right, -90 * deg, 40 * deg, {2.0, -1.0, 1.0}},
  }};
  std::vector<Calibration> out;
  for (const auto& m : mounts) {
    const Mat3 flu_to_ego = yaw(m.yaw_rad) * pitch(m.pitch_rad);
    out.push_back({m.name, m.role, intr, RigidTransform(flu_to_ego * optical_to_flu(), m.t)});
  }
  return out;
}

FixtureFrame fixture_frame(int k) {
  FixtureFrame f;
  f.curr = scene_at(k);
  f.prev = scene_at(k - 1);
  f.weather = std::string(kWeatherPresets[static_cast<std::size_t>(k) % kWeatherPresets.size()]);
  f.poses.timestamp = k * kFrameSeconds;
  f.poses.ego_prev = ego_at(k - 1);
  f.poses.ego_curr = ego_at(k);
  for (const auto& a : actors()) {
    const auto make = [&](int frame) {
      const RigidTransform p = a.pose(frame);
      return BoxRecord{OrientedBox3D(a.id, static_cast<std::uint8_t>(a.cls), p.translation(), a.half, p.rotation()),
                       a.dynamic};
    };
    if (k >= a.first_frame) {
      f.boxes.curr.push_back(make(k));
      f.poses.objects.curr[a.id] = a.pose(k);
    }
    if (k - 1 >= a.first_frame) {
      f.boxes.prev.push_back(make(k - 1));
      f.poses.objects.prev[a.id] = a.pose(k - 1);
    }
    if (k == a.first_frame) f.poses.objects.spawned.insert(a.id);
  }
  return f;
}

std::vector<Event> synth_events(const Raster8& rgb_prev, const Raster8& rgb_curr, std::int64_t t_begin,
                                std::int64_t t_end) {
  constexpr double kContrast = 0.15;
  constexpr int kMaxPerPixel = 3;
  auto log_gray = [](const std::uint8_t* p) {
    return std::log(1.0 + 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
  };
  std::vector<Event> out;
  const std::int64_t span = t_end - t_begin;
  for (int y = 0; y < rgb_curr.height(); ++y) {
    for (int x = 0; x < rgb_curr.width(); ++x) {
      const double d = log_gray(rgb_curr.pixel(x, y)) - log_gray(rgb_prev.pixel(x, y));
      const int n = std::min(kMaxPerPixel, static_cast<int>(std::abs(d) / kContrast));
      const std::int64_t jitter = (x * 7 + y * 13) % 97;
      for (int i = 0; i < n; ++i) {
        const std::int64_t t = t_begin + (i + 1) * span / (n + 1) + jitter - 48;
        out.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), std::clamp(t, t_begin, t_end - 1),
                       static_cast<std::int8_t>(d > 0 ? 1 : -1)});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return out;
}

void write_fixture(const fs::path& root, const FixtureOptions& options) {
  const int face_size =
      options.face_size > 0 ? options.face_size : static_cast<int>(std::lround(1280 * options.scale));
  const LayoutConfig layout;
  const DatasetManifest manifest{root, layout, {}};
  const auto calibs = fixture_calibrations(options);
  for (const auto& c : calibs) {
    const fs::path p = manifest.calibration_path(c.name);
    fs::create_directories(p.parent_path());
    write_json_file(p, calibration_to_json(c));
  }
  auto ensure = [](const fs::path& p) {
    fs::create_directories(p.parent_path());
    return p;
  };
  for (int k = 0; k < options.frames; ++k) {
    const FixtureFrame frame = fixture_frame(k);
    FrameEntry entry;
    entry.number = k;
    entry.id = layout.frame_name(k);
    write_json_file(ensure(manifest.frame_path(entry, FrameFile::boxes)), boxes_to_json(frame.boxes));
    write_json_file(ensure(manifest.frame_path(entry, FrameFile::poses)), poses_to_json(frame.poses));
    write_json_file(ensure(manifest.frame_path(entry, FrameFile::meta)),
                    {{"weather", frame.weather}, {"timestamp", frame.poses.timestamp}});
    for (const auto& c : calibs) {
      const auto curr = render_cubemap(frame.curr, face_size, frame.poses.ego_curr * c.cam_to_ego);
      const auto prev = render_cubemap(frame.prev, face_size, frame.poses.ego_prev * c.cam_to_ego);
      for (auto face : kCubeFaces) {
        auto path = [&](FaceModality m) { return ensure(manifest.face_path(entry, m, c.name, face)); };
        write_png(path(FaceModality::rgb), curr.rgb[face]);
        write_png(path(FaceModality::depth), encode_depth_raster(curr.depth[face], layout.far_plane));
        write_png(path(FaceModality::semantic), to_label_png(curr.semantic[face]));
        write_png(path(FaceModality::rgb_prev), prev.rgb[face]);
        write_png(path(FaceModality::depth_prev), encode_depth_raster(prev.depth[face], layout.far_plane));
        write_png(path(FaceModality::semantic_prev), to_label_png(prev.semantic[face]));
        write_events_npy(path(FaceModality::events),
                         synth_events(prev.rgb[face], curr.rgb[face], k * kFrameMicros, (k + 1) * kFrameMicros));
      }
    }
  }
}

}  // namespace fisheyegt::synth
