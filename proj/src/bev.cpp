#include "fisheyegt/bev.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <mutex>

#include "fisheyegt/classes.hpp"
#include "fisheyegt/parallel.hpp"

namespace fisheyegt {

void BevGrid::validate() const {
  if (!(extent_m > 0.0) || !std::isfinite(extent_m) || cells <= 0) {
    throw DomainError(fmt::format("BEV grid needs a positive extent and cell count, got {} m / {}",
                                  extent_m, cells));
  }
}

Vec2 BevGrid::cell_center(int row, int col) const noexcept {
  const double res = resolution();
  return {(0.5 * cells - row - 0.5) * res, (0.5 * cells - col - 0.5) * res};
}

std::optional<std::array<int, 2>> BevGrid::cell_of(double x, double y) const noexcept {
  const double res = resolution();
  const double row = std::floor(0.5 * cells - x / res);
  const double col = std::floor(0.5 * cells - y / res);
  if (!(row >= 0.0 && row < cells && col >= 0.0 && col < cells)) return std::nullopt;
  return std::array<int, 2>{static_cast<int>(row), static_cast<int>(col)};
}

std::string_view role_name(CameraRole role) noexcept {
  switch (role) {
    case CameraRole::front: return "front";
    case CameraRole::rear: return "rear";
    case CameraRole::left: return "left";
    case CameraRole::right: return "right";
  }
  return "?";
}

std::optional<CameraRole> parse_role(std::string_view name) noexcept {
  for (auto r : {CameraRole::front, CameraRole::rear, CameraRole::left, CameraRole::right}) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

BevLayer ipm_project(const Raster8& semantic, const FisheyeIntrinsics& intr,
                     const RigidTransform& cam_to_ego, const BevGrid& grid, CameraRole role) {
  grid.validate();
  if (!semantic.same_shape(intr.width(), intr.height()) || semantic.channels() != 1) {
    throw DomainError("semantic raster must be single-channel and match the camera size");
  }
  BevLayer layer{role, cam_to_ego.translation(), Raster8::labels(grid.cells, grid.cells, kNoLabel),
                 Raster8::labels(grid.cells, grid.cells)};
  const RigidTransform ego_to_cam = cam_to_ego.inverse();
  parallel_for_rows(grid.cells, [&](int row0, int row1) {
    for (int i = row0; i < row1; ++i) {
      for (int j = 0; j < grid.cells; ++j) {
        const Vec2 xy = grid.cell_center(i, j);
        const auto px = fisheye_project_point(intr, ego_to_cam.apply(Vec3(xy.x(), xy.y(), 0.0)));
        if (!px) continue;
        const long u = std::lround(px->x());
        const long v = std::lround(px->y());
        if (u < 0 || v < 0 || u >= intr.width() || v >= intr.height()) continue;
        const std::uint8_t label = semantic.at(static_cast<int>(u), static_cast<int>(v));
        if (label == kNoLabel) continue;
        layer.labels.at(j, i) = label;
        layer.hits.at(j, i) = 1;
      }
    }
  });
  return layer;
}

std::optional<Vec3> pixel_to_ground(const FisheyeIntrinsics& intr, const RigidTransform& cam_to_ego,
                                    const Vec2& pixel) {
  const auto dir = fisheye_try_unproject(intr, pixel);
  if (!dir) return std::nullopt;
  const Vec3 d = cam_to_ego.rotate(*dir);
  const Vec3& o = cam_to_ego.translation();
  if (!(d.z() < 0.0)) return std::nullopt;
  const double t = -o.z() / d.z();
  if (!(t > 0.0)) return std::nullopt;
  Vec3 g = o + t * d;
  g.z() = 0.0;
  return g;
}

BevFused fuse_bev(std::span<const BevLayer> layers, const BevGrid& grid) {
  grid.validate();
  for (const auto& l : layers) {
    if (!l.labels.same_shape(grid.cells, grid.cells) || !l.hits.same_shape(grid.cells, grid.cells)) {
      throw DomainError(fmt::format("BEV layer '{}' does not match the grid", role_name(l.role)));
    }
  }
  constexpr double kTie = 1e-9;
  BevFused out{Raster8::labels(grid.cells, grid.cells, kNoLabel),
               Raster8::labels(grid.cells, grid.cells)};
  parallel_for_rows(grid.cells, [&](int row0, int row1) {
    for (int i = row0; i < row1; ++i) {
      for (int j = 0; j < grid.cells; ++j) {
        const Vec2 xy = grid.cell_center(i, j);
        const Vec3 ground(xy.x(), xy.y(), 0.0);
        const BevLayer* best = nullptr;
        double best_dist = std::numeric_limits<double>::infinity();
        for (const auto& l : layers) {
          if (!l.hits.at(j, i)) continue;
          const double dist = (l.optical_center - ground).norm();
          const bool closer = dist < best_dist - kTie;
          const bool tied = std::abs(dist - best_dist) <= kTie;
          if (best == nullptr || closer || (tied && l.role < best->role)) {
            best = &l;
            best_dist = std::min(dist, best_dist);
          }
        }
        if (best == nullptr) continue;
        out.labels.at(j, i) = best->labels.at(j, i);
        out.hits.at(j, i) = 1;
      }
    }
  });
  return out;
}

RasterF bev_height(std::span<const BevDepthSource> sources, const BevGrid& grid) {
  grid.validate();
  constexpr float kEmpty = -std::numeric_limits<float>::infinity();
  RasterF height(grid.cells, grid.cells, 1, kEmpty);
  std::mutex merge;
  for (const auto& src : sources) {
    if (src.ray_distance == nullptr ||
        !src.ray_distance->same_shape(src.intr.width(), src.intr.height())) {
      throw DomainError("height source raster must match its camera size");
    }
    const RasterF& depth = *src.ray_distance;
    parallel_for_rows(depth.height(), [&](int row0, int row1) {
      RasterF partial(grid.cells, grid.cells, 1, kEmpty);
      for (int y = row0; y < row1; ++y) {
        for (int x = 0; x < depth.width(); ++x) {
          const auto p = backproject_camera(src.intr, Vec2(x, y), depth.at(x, y));
          if (!p) continue;
          const Vec3 e = src.cam_to_ego.apply(*p);
          const auto cell = grid.cell_of(e.x(), e.y());
          if (!cell) continue;
          float& h = partial.at((*cell)[1], (*cell)[0]);
          h = std::max(h, static_cast<float>(e.z()));
        }
      }
      const std::lock_guard lock(merge);
      auto dst = height.data();
      auto part = partial.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = std::max(dst[k], part[k]);
    });
  }
  for (auto& h : height.data()) {
    if (h == kEmpty) h = std::numeric_limits<float>::quiet_NaN();
  }
  return height;
}

}  // namespace fisheyegt
