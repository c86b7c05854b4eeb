// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any
// gated criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "fisheyegt/bev.hpp"
#include "fisheyegt/classes.hpp"
#include "fisheyegt/events.hpp"
#include "fisheyegt/flow.hpp"
#include "fisheyegt/instance.hpp"
#include "fisheyegt/lut.hpp"
#include "fisheyegt/motion.hpp"
#include "fisheyegt/parallel.hpp"
#include "fisheyegt/pipeline.hpp"
#include "fisheyegt/remap.hpp"
#include "fisheyegt/stats.hpp"
#include "fixture.hpp"
#include "oracles.hpp"
#include "stats_fixture.hpp"
#include "test_util.hpp"
#include "tree.hpp"

using namespace fisheyegt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool gated = true;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const FisheyeIntrinsics& lens() {
  static const FisheyeIntrinsics l = synth::fixture_intrinsics(1.0);
  return l;
}

Calibration fixture_camera(CameraRole role, double scale = 1.0) {
  for (auto& c : synth::fixture_calibrations(synth::FixtureOptions{scale, 0, 1})) {
    if (c.role == role) return c;
  }
  throw std::logic_error("no such camera");
}

// 1 -------------------------------------------------------------------------
Outcome projection_round_trip() {
  testutil::Rng rng(1001);
  std::vector<Vec2> pixels;
  while (pixels.size() < 10000) {
    const Vec2 p(rng.uniform(0, lens().width() - 1), rng.uniform(0, lens().height() - 1));
    if ((p - Vec2(lens().cx(), lens().cy())).norm() < lens().max_radius()) pixels.push_back(p);
  }
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& p : pixels) {
    const auto q = fisheye_project(lens(), fisheye_unproject(lens(), p));
    worst = std::max(worst, q ? (*q - p).norm() : 1e9);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 1.0, fmt::format("max error {:.2e} px over 10000 pixels in {:.3f} s", worst, secs)};
}

// 2 -------------------------------------------------------------------------
Outcome pinhole_constants() {
  const double f = pinhole_focal(90.0, 1024);
  const Mat3 K = PinholeIntrinsics(90.0, 1024, 768).K();
  const bool fields = K(0, 0) == 512.0 && K(0, 1) == 0.0 && K(0, 2) == 512.0 && K(1, 0) == 0.0 && K(1, 1) == 512.0 &&
                      K(1, 2) == 384.0 && K(2, 0) == 0.0 && K(2, 1) == 0.0 && K(2, 2) == 1.0;
  return {f == 512.0 && fields, fmt::format("f(90, 1024) = {:.17g}; K fields {}", f, fields ? "exact" : "wrong")};
}

// 3 -------------------------------------------------------------------------
std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::lround(127.5 * (1.0 + v))); }

Outcome remap_oracle() {
  synth::Scene scene;
  synth::Sphere sky;
  sky.radius = 50.0;
  sky.color = [](const Vec3& n) { return Rgb{channel(n.x()), channel(n.y()), channel(n.z())}; };
  const auto pose = fixture_camera(CameraRole::front).cam_to_ego;
  sky.center = pose.translation();
  scene.spheres.push_back(sky);

  const auto t0 = Clock::now();
  const auto cube = synth::render_cubemap(scene, 512, pose);
  const double t_render = seconds_since(t0);
  const auto t1 = Clock::now();
  const LookupTable lut = build_lut(lens(), 512);
  const Raster8 remapped = remap(lut, cube.rgb, Interpolation::bilinear);
  const double t_remap = seconds_since(t1);
  const auto direct = synth::render_fisheye(scene, lens(), pose);

  std::size_t valid = 0;
  std::size_t close = 0;
  for (int y = 0; y < lens().height(); ++y) {
    for (int x = 0; x < lens().width(); ++x) {
      if (!lut.at(x, y).valid) continue;
      ++valid;
      int diff = 0;
      for (int c = 0; c < 3; ++c) diff = std::max(diff, std::abs(remapped.at(x, y, c) - direct.rgb.at(x, y, c)));
      close += diff <= 1 ? 1 : 0;
    }
  }
  const double frac = static_cast<double>(close) / static_cast<double>(valid);
  const double total = t_render + t_remap;
  return {frac >= 0.999 && total < 10.0,
          fmt::format("{:.4f}% of {} valid pixels within 1 level; cubemap render {:.2f} s + LUT and remap {:.2f} s",
                      100.0 * frac, valid, t_render, t_remap)};
}

// 4 -------------------------------------------------------------------------
Outcome depth_oracle() {
  synth::Scene scene;
  synth::Sphere shell;
  shell.radius = 7.0;
  const auto pose = fixture_camera(CameraRole::left).cam_to_ego;
  shell.center = pose.translation();
  scene.spheres.push_back(shell);
  const auto cube = synth::render_cubemap(scene, 512, pose);
  const LookupTable lut = build_lut(lens(), 512);
  const RasterF dist = remap_depth(lut, cube.depth, Interpolation::bilinear);
  double worst = 0.0;
  std::size_t valid = 0;
  for (int y = 0; y < dist.height(); ++y) {
    for (int x = 0; x < dist.width(); ++x) {
      if (!lut.at(x, y).valid) continue;
      ++valid;
      const double d = dist.at(x, y);
      worst = std::max(worst, std::isfinite(d) ? std::abs(d - 7.0) : 1e9);
    }
  }
  return {worst <= 1e-3 && valid > 0, fmt::format("max |d - 7| = {:.2e} m over {} valid pixels", worst, valid)};
}

// 5 -------------------------------------------------------------------------
Outcome instance_equivalence() {
  testutil::Rng rng(5005);
  const PinholeIntrinsics intr(90, 64, 48);
  int equal = 0;
  int boxes_total = 0;
  std::size_t labelled = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<OrientedBox3D> boxes;
    const auto scene = testutil::random_box_scene(rng, boxes);
    boxes_total += static_cast<int>(boxes.size());
    const auto pose = testutil::forward_camera(Vec3(0, 0, 1.5), rng.uniform(-0.2, 0.3));
    const auto r = synth::render_pinhole(scene, intr, pose);
    const Raster32 ids = instance_ids(r.depth, r.semantic, boxes, intr, pose);
    const Raster32 ref = testutil::oracle_instances(r.depth, r.semantic, boxes, intr, pose);
    equal += ids == ref ? 1 : 0;
    labelled += static_cast<std::size_t>(std::count_if(ids.data().begin(), ids.data().end(), [](auto v) { return v != 0; }));
  }
  return {equal == 50, fmt::format("{}/50 frames identical ({} boxes, {} instance pixels)", equal, boxes_total, labelled)};
}

// 6 -------------------------------------------------------------------------
Outcome motion_thresholds() {
  constexpr int kFace = 128;
  const auto calibs = synth::fixture_calibrations(synth::FixtureOptions{1.0, kFace, 10});
  const PinholeIntrinsics face = face_intrinsics(kFace);
  bool monotone = true;
  std::size_t bike_at_025 = 0;
  std::size_t bike_at_05 = 0;
  bool exact_half = true;
  std::size_t moving_pixels = 0;
  for (int k = 1; k < 10; ++k) {
    const auto fr = synth::fixture_frame(k);
    auto records = motion_distances(fr.poses.objects.prev, fr.poses.objects.curr);
    std::erase_if(records, [&](const MotionRecord& m) { return fr.poses.objects.spawned.contains(m.object_id); });
    for (const auto& m : records) {
      if (m.object_id == 4) exact_half = exact_half && m.displacement == 0.5;
    }
    for (const auto& cal : calibs) {
      const RigidTransform cam = fr.poses.ego_curr * cal.cam_to_ego;
      const auto cube = synth::render_cubemap(fr.curr, kFace, cam);
      for (CubeFace f : kCubeFaces) {
        const RigidTransform face_pose = cam * RigidTransform(face_rotation(f), Vec3::Zero());
        const Raster32 ids = instance_ids(cube.depth[f], cube.semantic[f], fr.boxes.curr_boxes(), face, face_pose);
        std::vector<Raster8> masks;
        for (double t : kTableThresholds) masks.push_back(motion_mask(ids, records, t));
        for (std::size_t t = 1; t < masks.size(); ++t) {
          for (std::size_t i = 0; i < masks[t].data().size(); ++i) {
            monotone = monotone && masks[t].data()[i] <= masks[t - 1].data()[i];
          }
        }
        for (std::size_t i = 0; i < ids.data().size(); ++i) {
          moving_pixels += masks[0].data()[i];
          if (ids.data()[i] != 4) continue;
          bike_at_025 += masks[1].data()[i];
          bike_at_05 += masks[2].data()[i];
        }
      }
    }
  }
  const bool pass = monotone && exact_half && bike_at_025 > 0 && bike_at_05 == 0;
  return {pass, fmt::format("subset chain {}; object moving exactly 0.5 m: {} px at 0.25, {} px at 0.5; {} moving px at 0",
                            monotone ? "holds" : "BROKEN", bike_at_025, bike_at_05, moving_pixels)};
}

// 7 -------------------------------------------------------------------------
// Camera looking straight down at a painted ground with a thin plate that
// moves; every flow vector is an integer number of pixels.
bool integer_flow_transport(std::size_t& compared, std::size_t& occluded) {
  const PinholeIntrinsics intr(90, 96, 72);  // f = 48
  Mat3 down;
  down.col(0) = Vec3(1, 0, 0);
  down.col(1) = Vec3(0, -1, 0);
  down.col(2) = Vec3(0, 0, -1);
  const RigidTransform cam_prev(down, Vec3(0.1, 0.05, 12.0));
  const RigidTransform cam_curr(down, Vec3(1.1, 0.05, 12.0));  // ground flow -4 px
  const auto plate = [](double x) {
    return OrientedBox3D(1, static_cast<std::uint8_t>(SemanticClass::four_wheeler), Vec3(x, 0.61, 3.9995),
                         Vec3(1.3, 0.9, 0.0005));
  };
  synth::Scene prev;
  prev.ground = synth::Ground{1.0};
  prev.boxes.push_back({plate(-1.07), {}});
  synth::Scene curr = prev;
  curr.boxes[0].box = plate(0.93);  // plate flow +6 px
  const auto r0 = synth::render_pinhole(prev, intr, cam_prev);
  const auto r1 = synth::render_pinhole(curr, intr, cam_curr);
  ObjectMotion m;
  m.prev[1] = RigidTransform(Mat3::Identity(), Vec3(-1.07, 0.61, 3.9995));
  m.curr[1] = RigidTransform(Mat3::Identity(), Vec3(0.93, 0.61, 3.9995));
  FlowOptions opt;
  opt.depth_curr = &r1.depth;
  const auto flow = optical_flow(scene_flow(r0.depth, r0.ids, CameraModel(intr), cam_prev, m), CameraModel(intr),
                                 cam_prev, cam_curr, opt);
  bool ok = true;
  for (int y = 0; y < 72; ++y) {
    for (int x = 0; x < 96; ++x) {
      if (!flow.valid.at(x, y)) {
        ok = false;
        continue;
      }
      if (flow.occluded.at(x, y)) {
        ++occluded;
        continue;
      }
      const long u = std::lround(x + flow.flow.at(x, y, 0));
      const long v = std::lround(y + flow.flow.at(x, y, 1));
      if (u < 0 || v < 0 || u >= 96 || v >= 72) continue;
      ++compared;
      ok = ok && r1.semantic.at(static_cast<int>(u), static_cast<int>(v)) == r0.semantic.at(x, y);
    }
  }
  return ok && occluded > 0;
}

// General rigid motion of camera and object; frame-t labels are evaluated at
// the sub-pixel flow end point.
bool subpixel_transport(std::size_t& compared) {
  const PinholeIntrinsics intr(90, 160, 120);
  synth::Scene prev;
  prev.ground = synth::Ground{1.0};
  const OrientedBox3D car0(1, static_cast<std::uint8_t>(SemanticClass::four_wheeler), Vec3(9, 1.5, 0.8),
                           Vec3(2, 0.9, 0.8), rotation_about_z(0.1));
  const RigidTransform car_prev(car0.rotation(), car0.center());
  const RigidTransform car_curr(rotation_about_z(0.25), Vec3(9.8, 1.1, 0.8));
  prev.boxes.push_back({car0, {}});
  synth::Scene curr = prev;
  curr.boxes[0].box = car0.transformed(car_curr * car_prev.inverse());
  const auto pose_prev = testutil::forward_camera(Vec3(0.0137, 0.0211, 1.5), 0.25);
  const auto pose_curr = testutil::forward_camera(Vec3(0.6, 0.1, 1.5), 0.25);
  const auto r0 = synth::render_pinhole(prev, intr, pose_prev);
  const auto r1 = synth::render_pinhole(curr, intr, pose_curr);
  ObjectMotion m;
  m.prev[1] = car_prev;
  m.curr[1] = car_curr;
  FlowOptions opt;
  opt.depth_curr = &r1.depth;
  const auto flow = optical_flow(scene_flow(r0.depth, r0.ids, CameraModel(intr), pose_prev, m), CameraModel(intr),
                                 pose_prev, pose_curr, opt);
  bool ok = true;
  for (int y = 0; y < 120; ++y) {
    for (int x = 0; x < 160; ++x) {
      if (!flow.valid.at(x, y) || flow.occluded.at(x, y)) continue;
      const Vec2 p1 = Vec2(x, y) + Vec2(flow.flow.at(x, y, 0), flow.flow.at(x, y, 1));
      if (p1.x() < 0 || p1.y() < 0 || p1.x() > 159 || p1.y() > 119) continue;
      const Vec3 ray = pose_curr.rotate(Vec3((p1.x() - intr.cx()) / intr.focal(), (p1.y() - intr.cy()) / intr.focal(), 1.0).normalized());
      ok = ok && synth::trace(curr, pose_curr.translation(), ray).label == r0.semantic.at(x, y);
      ++compared;
    }
  }
  return ok;
}

Outcome optical_flow_checks() {
  // (a) static fixture scene seen by a static fisheye camera.
  const auto fr = synth::fixture_frame(3);
  const auto cal = fixture_camera(CameraRole::front, 0.5);
  const RigidTransform cam = fr.poses.ego_curr * cal.cam_to_ego;
  const auto r = synth::render_fisheye(fr.curr, cal.intr, cam);
  ObjectMotion still;
  still.prev = fr.poses.objects.curr;
  still.curr = fr.poses.objects.curr;
  const auto sf = scene_flow(r.depth, r.ids, CameraModel(cal.intr), cam, still);
  const auto fa = optical_flow(sf, CameraModel(cal.intr), cam, cam);
  double max_a = 0.0;
  std::size_t valid_a = 0;
  for (int y = 0; y < fa.valid.height(); ++y) {
    for (int x = 0; x < fa.valid.width(); ++x) {
      if (!fa.valid.at(x, y)) continue;
      ++valid_a;
      max_a = std::max(max_a, std::hypot(double{fa.flow.at(x, y, 0)}, double{fa.flow.at(x, y, 1)}));
    }
  }
  const bool a = max_a == 0.0 && valid_a > 0;

  // (b) pinhole camera moving toward a fronto-parallel plane.
  const PinholeIntrinsics intr(90, 640, 480);
  const double z0 = 20.0;
  const double tz = 2.0;
  const auto plane = scene_flow(RasterF(640, 480, 1, static_cast<float>(z0)), Raster32::labels(640, 480),
                                CameraModel(intr), RigidTransform(), {});
  const auto fb = optical_flow(plane, CameraModel(intr), RigidTransform(), RigidTransform(Mat3::Identity(), Vec3(0, 0, tz)));
  double max_b = 0.0;
  for (int y = 0; y < 480; ++y) {
    for (int x = 0; x < 640; ++x) {
      const Vec2 want = (Vec2(x, y) - Vec2(intr.cx(), intr.cy())) * tz / (z0 - tz);
      const double e = fb.valid.at(x, y) ? (Vec2(fb.flow.at(x, y, 0), fb.flow.at(x, y, 1)) - want).norm() : 1e9;
      max_b = std::max(max_b, e);
    }
  }
  const bool b = max_b < 1e-3;

  // (c) label transport.
  std::size_t n_int = 0;
  std::size_t n_occ = 0;
  std::size_t n_sub = 0;
  const bool c1 = integer_flow_transport(n_int, n_occ);
  const bool c2 = subpixel_transport(n_sub);
  return {a && b && c1 && c2,
          fmt::format("(a) max |flow| {} over {} px; (b) max error {:.2e} px; (c) {} + {} px transported, {} occluded: {}",
                      max_a, valid_a, max_b, n_int, n_sub, n_occ, c1 && c2 ? "exact" : "MISMATCH")};
}

// 8 -------------------------------------------------------------------------
Outcome event_remap() {
  constexpr int kFace = 512;
  const LookupTable lut = build_lut(lens(), kFace);
  const ReverseLut rev = invert_lut(lut);
  // Reference fan-out straight from the LUT entries.
  std::vector<std::vector<std::uint32_t>> targets(static_cast<std::size_t>(kFaceCount) * kFace * kFace);
  for (int y = 0; y < lut.height(); ++y) {
    for (int x = 0; x < lut.width(); ++x) {
      const auto& e = lut.at(x, y);
      if (!e.valid) continue;
      const int u = std::min(static_cast<int>(std::floor(e.u + 0.5)), kFace - 1);
      const int v = std::min(static_cast<int>(std::floor(e.v + 0.5)), kFace - 1);
      targets[(static_cast<std::size_t>(e.face) * kFace + v) * kFace + u].push_back(
          static_cast<std::uint32_t>(y * lut.width() + x));
    }
  }
  testutil::Rng rng(8008);
  std::array<EventStream, kFaceCount> faces;
  using Payload = std::tuple<std::int64_t, int, std::uint32_t>;
  std::vector<Payload> want;
  for (int f = 0; f < kFaceCount; ++f) {
    faces[f] = EventStream{kFace, kFace, {}};
    std::int64_t t = 0;
    for (int i = 0; i < 200000; ++i) {
      t += rng.integer(0, 4);
      const int u = rng.integer(0, kFace - 1);
      const int v = rng.integer(0, kFace - 1);
      const std::int8_t pol = rng.coin() ? 1 : -1;
      faces[f].events.push_back({static_cast<std::uint16_t>(u), static_cast<std::uint16_t>(v), t, pol});
      for (auto target : targets[(static_cast<std::size_t>(f) * kFace + v) * kFace + u]) want.emplace_back(t, pol, target);
    }
  }
  const auto t0 = Clock::now();
  const auto result = remap_events(faces, rev);
  const double secs = seconds_since(t0);
  const auto& ev = result.stream.events;
  const bool ordered = std::is_sorted(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  std::vector<Payload> got;
  got.reserve(ev.size());
  for (const Event& e : ev) got.emplace_back(e.t, e.pol, static_cast<std::uint32_t>(e.y * lut.width() + e.x));
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  const bool multiset = got == want;

  // Single-event renders.
  const Raster8 pos = render_events(EventStream{4, 4, {{2, 1, 10, 1}}}, 0, 20);
  const Raster8 neg = render_events(EventStream{4, 4, {{2, 1, 10, -1}}}, 0, 20);
  const bool colors = pos.at(2, 1, 0) == 0 && pos.at(2, 1, 1) == 0 && pos.at(2, 1, 2) == 255 && neg.at(2, 1, 0) == 255 &&
                      neg.at(2, 1, 1) == 0 && neg.at(2, 1, 2) == 0 && pos.at(0, 0, 2) == 0;
  return {ordered && multiset && colors && result.rejected == 0,
          fmt::format("1000000 face events -> {} fisheye events in {:.2f} s; multiset {}; order {}; colors {}", ev.size(),
                      secs, multiset ? "preserved" : "CHANGED", ordered ? "non-decreasing" : "BROKEN",
                      colors ? "blue/red" : "WRONG")};
}

// 9 -------------------------------------------------------------------------
Outcome ipm_exactness() {
  const BevGrid grid{20.0, 400};
  synth::Scene painted;
  painted.ground = synth::Ground{1.0};
  std::vector<BevLayer> layers;
  std::vector<Calibration> cams;
  std::size_t hit = 0;
  std::size_t resolved = 0;
  std::size_t wrong = 0;
  for (auto role : {CameraRole::front, CameraRole::rear, CameraRole::left, CameraRole::right}) {
    const auto cal = fixture_camera(role);
    const auto r = synth::render_fisheye(painted, cal.intr, cal.cam_to_ego);
    layers.push_back(ipm_project(r.semantic, cal.intr, cal.cam_to_ego, grid, role));
    cams.push_back(cal);
  }
  const auto fused = fuse_bev(layers, grid);
  for (int i = 0; i < grid.cells; ++i) {
    for (int j = 0; j < grid.cells; ++j) {
      if (!fused.hits.at(j, i)) continue;
      ++hit;
      const Vec2 c = grid.cell_center(i, j);
      // Closest camera that sees the cell, as the fusion rule says.
      std::size_t best = layers.size();
      for (std::size_t k = 0; k < layers.size(); ++k) {
        if (!layers[k].hits.at(j, i)) continue;
        const double d = (cams[k].cam_to_ego.translation() - Vec3(c.x(), c.y(), 0)).norm();
        if (best == layers.size() || d < (cams[best].cam_to_ego.translation() - Vec3(c.x(), c.y(), 0)).norm()) best = k;
      }
      const auto& cal = cams[best];
      const auto px = testutil::oracle_fisheye_project(cal.intr, cal.cam_to_ego.inverse().apply(Vec3(c.x(), c.y(), 0)));
      const Vec2 pixel(std::lround(px.x()), std::lround(px.y()));
      const auto seen = pixel_to_ground(cal.intr, cal.cam_to_ego, pixel);
      // Cells the lens resolves: the sampled pixel sees a point of this cell.
      if (!seen || grid.cell_of(seen->x(), seen->y()) != std::array<int, 2>{i, j}) continue;
      ++resolved;
      wrong += fused.labels.at(j, i) != painted.ground->label_at(c.x(), c.y()) ? 1 : 0;
    }
  }

  // Curbs: 0.12 m sidewalks either side of the road.
  synth::Scene curbs;
  curbs.ground = synth::Ground{1.0};
  const double curb = 0.12;
  for (double side : {-1.0, 1.0}) {
    curbs.boxes.push_back({OrientedBox3D(2000, static_cast<std::uint8_t>(SemanticClass::sidewalk),
                                         Vec3(15.0, side * 7.0, curb / 2), Vec3(45.0, 1.5, curb / 2)),
                           {}});
  }
  std::vector<synth::Render> renders;
  for (const auto& cal : cams) renders.push_back(synth::render_fisheye(curbs, cal.intr, cal.cam_to_ego));
  std::vector<BevDepthSource> sources;
  for (std::size_t k = 0; k < cams.size(); ++k) sources.push_back({&renders[k].depth, cams[k].intr, cams[k].cam_to_ego});
  const RasterF height = bev_height(sources, grid);
  const double res = grid.resolution();
  double worst_top = 0.0;
  double worst_ground = 0.0;
  std::size_t top = 0;
  std::size_t ground = 0;
  for (int i = 0; i < grid.cells; ++i) {
    for (int j = 0; j < grid.cells; ++j) {
      const float h = height.at(j, i);
      if (std::isnan(h)) continue;
      const double ay = std::abs(grid.cell_center(i, j).y());
      if (ay > 5.5 + res && ay < 8.5 - res) {
        worst_top = std::max(worst_top, std::abs(h - curb));
        ++top;
      } else if (ay < 5.5 - res || ay > 8.5 + res) {
        worst_ground = std::max(worst_ground, std::abs(double{h}));
        ++ground;
      }
    }
  }
  const bool pass = wrong == 0 && resolved > 0 && top > 0 && worst_top <= res && worst_ground <= res;
  return {pass, fmt::format("labels: {}/{} resolved cells correct ({} cells hit); curb: max error {:.4f} m on {} cells, "
                            "ground {:.4f} m on {} cells (resolution {} m)",
                            resolved - wrong, resolved, hit, worst_top, top, worst_ground, ground, res)};
}

// Shared 10-frame fixture for 10 and 11.
struct Dataset {
  testutil::TempDir dir{"fgt-accept"};
  fs::path input;
  bool written = false;
};

Dataset& dataset() {
  static Dataset d;
  if (!d.written) {
    d.input = d.dir / "in";
    synth::write_fixture(d.input, synth::FixtureOptions{0.25, 256, 10});
    d.written = true;
  }
  return d;
}

PipelineConfig fixture_config(const fs::path& out, unsigned workers) {
  PipelineConfig c;
  c.input = dataset().input;
  c.output = out;
  c.workers = workers;
  c.grid = BevGrid{40.0, 256};
  return c;
}

// 10 ------------------------------------------------------------------------
Outcome statistics() {
  const auto frames = testutil::hand_stats_frames();
  const auto want = testutil::hand_stats_expected();
  const ObjectStats s = object_statistics(frames);
  int matched = 0;
  int total = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    matched += s.percent_of_images(c) == want.percent[c];
    matched += s.objects_per_image(c) == want.per_image[c];
    total += 2;
    for (std::size_t t = 0; t < 5; ++t) {
      matched += s.moving_per_image(c, t) == want.moving[c][t];
      ++total;
    }
  }
  const std::string table = format_object_table(s);
  const bool layout = table.find("% of images") != std::string::npos && table.find("objects/image") != std::string::npos &&
                      table.find("Moving objects (threshold, m)") != std::string::npos &&
                      table.find("Two-wheeler vehicle  |        50.00           0.50 |   0.50   0.50   0.50   0.50   0.00") !=
                          std::string::npos;

  // Histogram over the fixture's semantic outputs, BEV included.
  testutil::TempDir out;
  auto cfg = fixture_config(out / "o", 0);
  cfg.stages = {Stage::lut, Stage::rgb, Stage::bev, Stage::stats};
  const auto run = run_pipeline(cfg);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(out / "o")) {
    const auto name = e.path().filename().string();
    if (name.ends_with("_semantic.png")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const auto h = class_pixel_histogram(files);
  double sum = 0.0;
  for (int k = 0; k < kClassCount; ++k) sum += h.percent(k);
  double sum_random = 0.0;
  testutil::Rng rng(1010);
  bool random_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    ClassHistogram r;
    Raster8 img = Raster8::labels(rng.integer(1, 64), rng.integer(1, 64));
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.integer(0, 255));
    r.add(img);
    if (r.total() == 0) continue;
    sum_random = 0.0;
    for (int k = 0; k < kClassCount; ++k) sum_random += r.percent(k);
    random_ok = random_ok && std::abs(sum_random - 100.0) <= 1e-6;
  }
  const bool hist = std::abs(sum - 100.0) <= 1e-6 && random_ok && run.exit_code() == 0;
  return {matched == total && layout && hist,
          fmt::format("{}/{} hand-counted values match; table layout {}; histogram over {} rasters sums to {:.9f}",
                      matched, total, layout ? "ok" : "WRONG", files.size(), sum)};
}

// 11 ------------------------------------------------------------------------
Outcome determinism() {
  testutil::TempDir out;
  const auto t0 = Clock::now();
  const auto a = run_pipeline(fixture_config(out / "a", 8));
  const auto b = run_pipeline(fixture_config(out / "b", 8));
  const auto c = run_pipeline(fixture_config(out / "c", 1));
  const double secs = seconds_since(t0);
  const auto ta = testutil::tree_hashes(out / "a");
  const auto tb = testutil::tree_hashes(out / "b");
  const auto tc = testutil::tree_hashes(out / "c");
  const bool ok = a.exit_code() == 0 && b.exit_code() == 0 && c.exit_code() == 0 && a.frames_processed == 10 &&
                  ta == tb && ta == tc;
  return {ok, fmt::format("10 frames, {} files per run; runs with 8, 8 and 1 workers {} ({:.1f} s)", ta.size(),
                          ta == tb && ta == tc ? "byte-identical" : "DIFFER", secs)};
}

// 12 ------------------------------------------------------------------------
Outcome throughput() {
  testutil::TempDir work;
  synth::write_fixture(work / "in", synth::FixtureOptions{1.0, 0, 1});
  PipelineConfig cfg;
  cfg.input = work / "in";
  cfg.output = work / "o";
  const auto s = run_pipeline(cfg);
  double per_frame = s.wall_seconds;
  for (const char* stage : {"lut", "stats"}) {
    if (auto it = s.stage_seconds.find(stage); it != s.stage_seconds.end()) per_frame -= it->second;
  }
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  return {s.exit_code() == 0 && s.frames_processed == 1 && per_frame < 2.0,
          fmt::format("{:.2f} s per 4-camera 1280x966 frame, all modalities, on {} hardware thread(s); "
                      "LUT build {:.2f} s once; not gated",
                      per_frame, cores, s.stage_seconds.count("lut") ? s.stage_seconds.at("lut") : 0.0),
          false};
}

}  // namespace

// Optional arguments pick criteria by number; none runs all of them.
int main(int argc, char** argv) {
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"projection round trip", projection_round_trip},
      {"pinhole constants", pinhole_constants},
      {"cubemap remap vs direct rendering", remap_oracle},
      {"ray-distance conversion", depth_oracle},
      {"instance ids vs brute force", instance_equivalence},
      {"motion thresholds", motion_thresholds},
      {"optical flow", optical_flow_checks},
      {"event remap", event_remap},
      {"BEV ground plane and curb", ipm_exactness},
      {"statistics", statistics},
      {"determinism", determinism},
      {"throughput", throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass && o.gated) ++failures;
    std::printf("criterion %2zu %s: %s%s -- %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.gated ? "" : " (informational)", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
