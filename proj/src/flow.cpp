#include "fisheyegt/flow.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <tuple>

#include "fisheyegt/parallel.hpp"

namespace fisheyegt {
namespace {

enum class ObjectState { fixed, moved, invalid, missing };

struct ObjectRule {
  ObjectState state = ObjectState::fixed;
  RigidTransform motion;
};

ObjectRule rule_for(ObjectId id, const ObjectMotion& m) {
  if (id == 0) return {};
  if (m.spawned.contains(id)) return {ObjectState::invalid, {}};
  const auto p = m.prev.find(id);
  const auto c = m.curr.find(id);
  if (p != m.prev.end() && c != m.curr.end()) {
    // An unmoved object keeps its points bit for bit.
    if (p->second.rotation() == c->second.rotation() && p->second.translation() == c->second.translation()) return {};
    return {ObjectState::moved, c->second * p->second.inverse()};
  }
  if (p != m.prev.end()) return {ObjectState::invalid, {}};  // gone at t
  if (c != m.curr.end()) return {ObjectState::missing, {}};
  return {};
}

Rgb hsv_to_rgb(double hue_deg, double s, double v) {
  const double h = hue_deg / 60.0;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto to8 = [](double u) { return static_cast<std::uint8_t>(std::lround(std::clamp(u, 0.0, 1.0) * 255.0)); };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

}  // namespace

MissingTransformError::MissingTransformError(std::vector<ObjectId> ids)
    : std::runtime_error(fmt::format("missing t-1 transform for dynamic object(s) {}",
                                     fmt::join(ids, ", "))),
      ids_(std::move(ids)) {}

SceneFlow scene_flow(const RasterF& depth, const Raster32& ids, const CameraModel& camera,
                     const RigidTransform& cam_to_world_prev, const ObjectMotion& motion) {
  const int w = camera_width(camera);
  const int h = camera_height(camera);
  if (!depth.same_shape(w, h) || !ids.same_shape(w, h)) {
    throw DomainError(fmt::format("depth {}x{} and ids {}x{} must match the camera {}x{}",
                                  depth.width(), depth.height(), ids.width(), ids.height(), w, h));
  }

  std::map<ObjectId, ObjectRule> rules;
  std::vector<ObjectId> missing;
  for (ObjectId id : std::set<ObjectId>(ids.data().begin(), ids.data().end())) {
    const auto r = rule_for(id, motion);
    if (r.state == ObjectState::missing) missing.push_back(id);
    rules.emplace(id, r);
  }
  if (!missing.empty()) throw MissingTransformError(std::move(missing));

  SceneFlow scene{w, h, std::vector<ScenePoint>(static_cast<std::size_t>(w) * h)};
  parallel_for_rows(h, [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < w; ++x) {
        auto& sp = scene.points[static_cast<std::size_t>(y) * w + x];
        const auto& rule = rules.at(ids.at(x, y));
        if (rule.state == ObjectState::invalid) continue;
        const auto p = backproject_camera(camera, Vec2(x, y), depth.at(x, y));
        if (!p) continue;
        sp.prev = cam_to_world_prev.apply(*p);
        sp.curr = rule.state == ObjectState::moved ? rule.motion.apply(sp.prev) : sp.prev;
        sp.valid = true;
      }
    }
  });
  return scene;
}

FlowField optical_flow(const SceneFlow& scene, const CameraModel& camera,
                       const RigidTransform& cam_to_world_prev,
                       const RigidTransform& cam_to_world_curr, const FlowOptions& options) {
  const int w = scene.width;
  const int h = scene.height;
  if (camera_width(camera) != w || camera_height(camera) != h) {
    throw DomainError("scene flow and camera disagree on the raster size");
  }
  const RasterF* depth_curr = options.depth_curr;
  if (depth_curr != nullptr && !depth_curr->same_shape(w, h)) {
    throw DomainError("t depth raster must match the camera size");
  }
  const RigidTransform world_to_prev = cam_to_world_prev.inverse();
  const RigidTransform world_to_curr = cam_to_world_curr.inverse();

  FlowField out{RasterF(w, h, 2, std::numeric_limits<float>::quiet_NaN()), Raster8::labels(w, h),
                Raster8::labels(w, h)};
  std::atomic<std::size_t> checked{0};
  std::atomic<std::size_t> mismatched{0};
  parallel_for_rows(h, [&](int row0, int row1) {
    std::size_t n_checked = 0;
    std::size_t n_mismatched = 0;
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < w; ++x) {
        const ScenePoint& sp = scene.at(x, y);
        if (!sp.valid) continue;
        const auto p0 = project(camera, world_to_prev.apply(sp.prev));
        if (!p0) continue;
        ++n_checked;
        if ((*p0 - Vec2(x, y)).norm() > options.self_check_tolerance) ++n_mismatched;
        const Vec3 c1 = world_to_curr.apply(sp.curr);
        const auto p1 = project(camera, c1);
        if (!p1) continue;
        const Vec2 f = *p1 - *p0;
        out.flow.at(x, y, 0) = static_cast<float>(f.x());
        out.flow.at(x, y, 1) = static_cast<float>(f.y());
        out.valid.at(x, y) = 1;
        if (depth_curr == nullptr) continue;
        // Nearest pixel first, then inverse depth interpolated over the
        // surrounding pixels; the second catches end points just across the
        // edge of a closer surface and is exact on planes.
        const double behind = depth_value(camera, c1) - options.occlusion_margin;
        const long un = std::lround(p1->x());
        const long vn = std::lround(p1->y());
        if (un < 0 || vn < 0 || un >= w || vn >= h) continue;
        const float nearest = depth_curr->at(static_cast<int>(un), static_cast<int>(vn));
        if (std::isfinite(nearest) && behind > double{nearest}) {
          out.occluded.at(x, y) = 1;
          continue;
        }
        const int u0 = std::clamp(static_cast<int>(std::floor(p1->x())), 0, w - 1);
        const int v0 = std::clamp(static_cast<int>(std::floor(p1->y())), 0, h - 1);
        const int u1 = std::min(u0 + 1, w - 1);
        const int v1 = std::min(v0 + 1, h - 1);
        const double fx = std::clamp(p1->x() - u0, 0.0, 1.0);
        const double fy = std::clamp(p1->y() - v0, 0.0, 1.0);
        const std::array<std::tuple<int, int, double>, 4> taps = {{{u0, v0, (1 - fx) * (1 - fy)},
                                                                  {u1, v0, fx * (1 - fy)},
                                                                  {u0, v1, (1 - fx) * fy},
                                                                  {u1, v1, fx * fy}}};
        double inv = 0.0;
        double weight = 0.0;
        for (const auto& [u, v, wt] : taps) {
          const float d = depth_curr->at(u, v);
          if (!std::isfinite(d) || !(d > 0.0f) || wt == 0.0) continue;
          inv += wt / double{d};
          weight += wt;
        }
        if (weight > 0.0 && behind > weight / inv) out.occluded.at(x, y) = 1;
      }
    }
    checked += n_checked;
    mismatched += n_mismatched;
  });
  if (mismatched > 0 &&
      static_cast<double>(mismatched) > options.max_mismatch_fraction * static_cast<double>(checked)) {
    throw PoseInconsistencyError(fmt::format(
        "{} of {} pixels do not reproject onto themselves within {} px; the t-1 pose does not "
        "match the depth raster",
        mismatched.load(), checked.load(), options.self_check_tolerance));
  }
  return out;
}

double flow_color_scale(const FlowField& flow, const FlowWheel& wheel) {
  if (wheel.max_magnitude > 0.0) return wheel.max_magnitude;
  double max_mag = 0.0;
  for (int y = 0; y < flow.flow.height(); ++y) {
    for (int x = 0; x < flow.flow.width(); ++x) {
      if (!flow.valid.at(x, y)) continue;
      max_mag = std::max(max_mag, std::hypot(double{flow.flow.at(x, y, 0)}, double{flow.flow.at(x, y, 1)}));
    }
  }
  return max_mag > 0.0 ? max_mag : 1.0;
}

Raster8 flow_colorize(const FlowField& flow, const FlowWheel& wheel) {
  const double scale = flow_color_scale(flow, wheel);
  Raster8 out(flow.flow.width(), flow.flow.height(), 3);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!flow.valid.at(x, y)) continue;
      const double dx = flow.flow.at(x, y, 0);
      const double dy = flow.flow.at(x, y, 1);
      double hue = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
      if (hue < 0.0) hue += 360.0;
      const Rgb c = hsv_to_rgb(hue, std::min(std::hypot(dx, dy) / scale, 1.0), 1.0);
      std::uint8_t* p = out.pixel(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
    }
  }
  return out;
}

}  // namespace fisheyegt
