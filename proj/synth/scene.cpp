#include "scene.hpp"

#include <cmath>
#include <limits>

#include "fisheyegt/parallel.hpp"

namespace fisheyegt::synth {

std::uint8_t Ground::label_at(double x, double y) const noexcept {
  const auto i = static_cast<long long>(std::floor(x / cell));
  const auto j = static_cast<long long>(std::floor(y / cell));
  return ((i + j) % 2 == 0) ? label_even : label_odd;
}

namespace {

// Slab test in the box frame; returns the entry distance when the origin is
// outside the box.
std::optional<double> intersect_box(const OrientedBox3D& b, const Vec3& o, const Vec3& d) {
  const Vec3 lo = b.rotation().transpose() * (o - b.center());
  const Vec3 ld = b.rotation().transpose() * d;
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double h = b.half_extents()[k];
    if (ld[k] == 0.0) {
      if (std::abs(lo[k]) > h) return std::nullopt;
      continue;
    }
    double a = (-h - lo[k]) / ld[k];
    double c = (h - lo[k]) / ld[k];
    if (a > c) std::swap(a, c);
    t0 = std::max(t0, a);
    t1 = std::min(t1, c);
    if (t0 > t1) return std::nullopt;
  }
  if (t0 <= 0.0) return std::nullopt;
  return t0;
}

std::optional<double> intersect_sphere(const Sphere& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  if (-b - root > 0.0) return -b - root;
  if (-b + root > 0.0) return -b + root;
  return std::nullopt;
}

Rgb ground_color(std::uint8_t label) { return class_info(static_cast<SemanticClass>(label)).color; }

void store(Render& r, int x, int y, const Hit& h, double depth) {
  r.depth.at(x, y) = static_cast<float>(depth);
  r.semantic.at(x, y) = h.label;
  r.ids.at(x, y) = h.object_id;
  std::uint8_t* p = r.rgb.pixel(x, y);
  p[0] = h.color.r;
  p[1] = h.color.g;
  p[2] = h.color.b;
}

Render blank(int w, int h, float depth_fill, std::uint8_t label_fill) {
  return {RasterF(w, h, 1, depth_fill), Raster8::labels(w, h, label_fill), Raster32::labels(w, h),
          Raster8(w, h, 3)};
}

}  // namespace

Hit trace(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  Hit best;
  best.distance = std::numeric_limits<double>::infinity();
  if (scene.ground && dir.z() < 0.0 && origin.z() > 0.0) {
    const double t = -origin.z() / dir.z();
    const Vec3 p = origin + t * dir;
    const auto label = scene.ground->label_at(p.x(), p.y());
    best = {t, label, 0, ground_color(label), true};
  }
  for (const auto& b : scene.boxes) {
    const auto t = intersect_box(b.box, origin, dir);
    if (t && *t < best.distance) best = {*t, b.box.class_id(), b.box.object_id(), b.color, true};
  }
  for (const auto& s : scene.spheres) {
    const auto t = intersect_sphere(s, origin, dir);
    if (t && *t < best.distance) {
      const Vec3 n = (origin + *t * dir - s.center).normalized();
      best = {*t, s.label, 0, s.color ? s.color(n) : Rgb{128, 128, 128}, true};
    }
  }
  if (!best.hit) best = Hit{};
  return best;
}

Render render_pinhole(const Scene& scene, const PinholeIntrinsics& intr,
                      const RigidTransform& cam_to_world) {
  Render r = blank(intr.width(), intr.height(), 0.0f, 0);
  parallel_for_rows(intr.height(), [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < intr.width(); ++x) {
        const Vec3 ray = pinhole_backproject_camera(intr, Vec2(x, y), 1.0);
        const Vec3 dir = ray.normalized();
        const Hit h = trace(scene, cam_to_world.translation(), cam_to_world.rotate(dir));
        const double plane = h.hit ? h.distance * dir.z() : scene.far_plane;
        store(r, x, y, h, std::min(plane, scene.far_plane));
      }
    }
  });
  return r;
}

Render render_fisheye(const Scene& scene, const FisheyeIntrinsics& intr,
                      const RigidTransform& cam_to_world) {
  Render r = blank(intr.width(), intr.height(), std::numeric_limits<float>::quiet_NaN(), kNoLabel);
  parallel_for_rows(intr.height(), [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < intr.width(); ++x) {
        const auto dir = fisheye_try_unproject(intr, Vec2(x, y));
        if (!dir) continue;
        const Hit h = trace(scene, cam_to_world.translation(), cam_to_world.rotate(*dir));
        store(r, x, y, h, h.hit ? std::min(h.distance, scene.far_plane) : scene.far_plane);
      }
    }
  });
  return r;
}

CubemapRender render_cubemap(const Scene& scene, int face_size, const RigidTransform& cam_to_world) {
  const PinholeIntrinsics face_intr = face_intrinsics(face_size);
  CubemapRender out;
  out.depth.face_size = out.semantic.face_size = out.ids.face_size = out.rgb.face_size = face_size;
  for (auto face : kCubeFaces) {
    const RigidTransform face_to_world = cam_to_world * RigidTransform(face_rotation(face), Vec3::Zero());
    Render r = render_pinhole(scene, face_intr, face_to_world);
    out.depth[face] = std::move(r.depth);
    out.semantic[face] = std::move(r.semantic);
    out.ids[face] = std::move(r.ids);
    out.rgb[face] = std::move(r.rgb);
  }
  return out;
}

}  // namespace fisheyegt::synth
