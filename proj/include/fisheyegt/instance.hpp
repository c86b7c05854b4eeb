#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/geometry.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

struct InstanceRaster {
  Raster32 ids;    // object id per pixel, 0 = no instance
  Raster8 colors;  // RGB, black where ids is 0
};

/// Instance ids for a pinhole render. Pixels whose semantic class carries
/// instances are back-projected with their plane depth and take the id of
/// the box containing the point; when boxes overlap the smallest volume
/// wins, ties going to the lower id. Pixels without a finite positive depth
/// stay 0. Throws DomainError on a shape mismatch or duplicate ids.
Raster32 instance_ids(const RasterF& depth, const Raster8& semantic,
                      std::span<const OrientedBox3D> boxes, const PinholeIntrinsics& intr,
                      const RigidTransform& cam_to_world, double epsilon = kBoxTolerance);

/// Deterministic color for an object in a recording session. Never black.
Rgb assign_instance_color(ObjectId id, std::uint64_t session_seed, std::uint32_t salt = 0) noexcept;

/// Colors for a set of ids, visited in ascending order; an id whose color
/// is already taken is re-hashed with an increasing salt, so colors are
/// distinct within the set.
std::map<ObjectId, Rgb> instance_palette(std::span<const ObjectId> ids, std::uint64_t session_seed);

/// RGB rendering of an id raster with instance_palette over its ids.
Raster8 colorize_instances(const Raster32& ids, std::uint64_t session_seed);

InstanceRaster instance_segmentation(const RasterF& depth, const Raster8& semantic,
                                     std::span<const OrientedBox3D> boxes,
                                     const PinholeIntrinsics& intr,
                                     const RigidTransform& cam_to_world, std::uint64_t session_seed,
                                     double epsilon = kBoxTolerance);

}  // namespace fisheyegt
