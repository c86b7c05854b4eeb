#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/geometry.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// Square metric grid centred on the ego origin. Ego frame: +X forward,
/// +Y left, +Z up, ground at Z = 0. Row 0 is the far front edge, column 0
/// the far left edge.
struct BevGrid {
  double extent_m = 40.0;
  int cells = 1024;

  double resolution() const noexcept { return extent_m / cells; }
  /// Throws DomainError unless extent > 0 and cells > 0.
  void validate() const;
  /// Ego-frame (X, Y) of the cell centre.
  Vec2 cell_center(int row, int col) const noexcept;
  /// Cell containing ego-frame (X, Y); nullopt outside the grid.
  std::optional<std::array<int, 2>> cell_of(double x, double y) const noexcept;

  bool operator==(const BevGrid&) const = default;
};

/// Surround-view camera positions, in fusion precedence order.
enum class CameraRole : std::uint8_t { front = 0, rear = 1, left = 2, right = 3 };

std::string_view role_name(CameraRole role) noexcept;
std::optional<CameraRole> parse_role(std::string_view name) noexcept;

struct BevLayer {
  CameraRole role = CameraRole::front;
  Vec3 optical_center = Vec3::Zero();  // ego frame
  Raster8 labels;  // class per cell, kNoLabel where not hit
  Raster8 hits;    // 0/1
};

/// Inverse perspective mapping under the flat-ground assumption: every cell
/// centre (X, Y, 0) is projected into the fisheye image and takes the label
/// of the nearest pixel. Anything above the ground is smeared outward, as
/// expected from a flat-ground model. Pixels labelled kNoLabel give no hit.
BevLayer ipm_project(const Raster8& semantic, const FisheyeIntrinsics& intr,
                     const RigidTransform& cam_to_ego, const BevGrid& grid, CameraRole role);

/// Ground point (ego frame, Z = 0) seen through `pixel`; nullopt when the
/// pixel is outside the coverage or its ray does not descend to the ground.
std::optional<Vec3> pixel_to_ground(const FisheyeIntrinsics& intr, const RigidTransform& cam_to_ego,
                                    const Vec2& pixel);

struct BevFused {
  Raster8 labels;  // kNoLabel where no camera sees the cell
  Raster8 hits;    // 0/1
};

/// Each cell takes the label of the camera whose optical centre is closest
/// to the cell's ground point; equal distances go by role precedence. The
/// result does not depend on the order of `layers`.
BevFused fuse_bev(std::span<const BevLayer> layers, const BevGrid& grid);

struct BevDepthSource {
  const RasterF* ray_distance = nullptr;  // fisheye raster, meters
  FisheyeIntrinsics intr;
  RigidTransform cam_to_ego;
};

/// Back-projects every pixel with a finite positive ray distance into the
/// ego frame and keeps the highest point per cell. Empty cells are NaN.
RasterF bev_height(std::span<const BevDepthSource> sources, const BevGrid& grid);

}  // namespace fisheyegt
