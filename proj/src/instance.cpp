#include "fisheyegt/instance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fisheyegt/classes.hpp"
#include "fisheyegt/parallel.hpp"

namespace fisheyegt {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint32_t pack(Rgb c) noexcept { return (std::uint32_t{c.r} << 16) | (c.g << 8) | c.b; }

}  // namespace

Raster32 instance_ids(const RasterF& depth, const Raster8& semantic,
                      std::span<const OrientedBox3D> boxes, const PinholeIntrinsics& intr,
                      const RigidTransform& cam_to_world, double epsilon) {
  if (!depth.same_shape(semantic.width(), semantic.height()) ||
      !depth.same_shape(intr.width(), intr.height())) {
    throw DomainError(fmt::format("depth {}x{}, semantic {}x{} and camera {}x{} must match",
                                  depth.width(), depth.height(), semantic.width(),
                                  semantic.height(), intr.width(), intr.height()));
  }
  if (depth.channels() != 1 || semantic.channels() != 1) {
    throw DomainError("depth and semantic rasters must have one channel");
  }
  check_unique_ids(boxes);

  // Smallest volume first, so the first containing box is the winner.
  std::vector<const OrientedBox3D*> order;
  order.reserve(boxes.size());
  for (const auto& b : boxes) order.push_back(&b);
  std::sort(order.begin(), order.end(), [](const OrientedBox3D* a, const OrientedBox3D* b) {
    if (a->volume() != b->volume()) return a->volume() < b->volume();
    return a->object_id() < b->object_id();
  });

  auto ids = Raster32::labels(depth.width(), depth.height());
  if (order.empty()) return ids;
  parallel_for_rows(depth.height(), [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < depth.width(); ++x) {
        if (!is_instance_class(semantic.at(x, y))) continue;
        const double d = depth.at(x, y);
        if (!std::isfinite(d) || d <= 0.0) continue;
        const Vec3 p = backproject(intr, cam_to_world, Vec2(x, y), d);
        for (const auto* box : order) {
          if (point_in_box(p, *box, epsilon)) {
            ids.at(x, y) = box->object_id();
            break;
          }
        }
      }
    }
  });
  return ids;
}

Rgb assign_instance_color(ObjectId id, std::uint64_t session_seed, std::uint32_t salt) noexcept {
  std::uint64_t h = splitmix64(session_seed) ^ (std::uint64_t{salt} << 32 | id);
  for (;;) {
    h = splitmix64(h);
    const Rgb c{static_cast<std::uint8_t>(h >> 16), static_cast<std::uint8_t>(h >> 8),
                static_cast<std::uint8_t>(h)};
    if (c != Rgb{}) return c;
  }
}

std::map<ObjectId, Rgb> instance_palette(std::span<const ObjectId> ids, std::uint64_t session_seed) {
  std::vector<ObjectId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<ObjectId, Rgb> palette;
  std::set<std::uint32_t> used;
  for (ObjectId id : sorted) {
    if (id == 0) continue;
    Rgb c;
    std::uint32_t salt = 0;
    do {
      c = assign_instance_color(id, session_seed, salt++);
    } while (used.contains(pack(c)));
    used.insert(pack(c));
    palette.emplace(id, c);
  }
  return palette;
}

Raster8 colorize_instances(const Raster32& ids, std::uint64_t session_seed) {
  std::set<ObjectId> present(ids.data().begin(), ids.data().end());
  const std::vector<ObjectId> list(present.begin(), present.end());
  const auto palette = instance_palette(list, session_seed);
  Raster8 out(ids.width(), ids.height(), 3);
  for (int y = 0; y < ids.height(); ++y) {
    for (int x = 0; x < ids.width(); ++x) {
      const ObjectId id = ids.at(x, y);
      if (id == 0) continue;
      const Rgb c = palette.at(id);
      std::uint8_t* p = out.pixel(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
    }
  }
  return out;
}

InstanceRaster instance_segmentation(const RasterF& depth, const Raster8& semantic,
                                     std::span<const OrientedBox3D> boxes,
                                     const PinholeIntrinsics& intr,
                                     const RigidTransform& cam_to_world, std::uint64_t session_seed,
                                     double epsilon) {
  InstanceRaster out;
  out.ids = instance_ids(depth, semantic, boxes, intr, cam_to_world, epsilon);
  out.colors = colorize_instances(out.ids, session_seed);
  return out;
}

}  // namespace fisheyegt
