#pragma once

// Analytic ray-cast scenes used to produce fixtures and test oracles.

#include <functional>
#include <optional>
#include <vector>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/classes.hpp"
#include "fisheyegt/cubemap.hpp"
#include "fisheyegt/geometry.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt::synth {

/// Ground plane Z = 0 painted with a checkerboard of `cell` meters.
struct Ground {
  double cell = 1.0;
  std::uint8_t label_even = static_cast<std::uint8_t>(SemanticClass::road);
  std::uint8_t label_odd = static_cast<std::uint8_t>(SemanticClass::road_line);

  std::uint8_t label_at(double x, double y) const noexcept;
};

struct Box {
  OrientedBox3D box;
  Rgb color{200, 200, 200};
};

/// Sphere seen from inside or outside; `color` receives the unit direction
/// from the centre to the surface point.
struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  std::uint8_t label = static_cast<std::uint8_t>(SemanticClass::building);
  std::function<Rgb(const Vec3&)> color;
};

struct Scene {
  std::optional<Ground> ground;
  std::vector<Box> boxes;
  std::vector<Sphere> spheres;
  double far_plane = 1000.0;
};

struct Hit {
  double distance = 0.0;  // along the unit ray
  std::uint8_t label = static_cast<std::uint8_t>(SemanticClass::sky);
  ObjectId object_id = 0;
  Rgb color{70, 130, 180};
  bool hit = false;
};

/// Closest intersection along a world-frame ray with unit direction.
Hit trace(const Scene& scene, const Vec3& origin, const Vec3& dir);

struct Render {
  RasterF depth;      // plane depth (pinhole, faces) or ray distance (fisheye)
  Raster8 semantic;   // labels, kNoLabel outside the coverage
  Raster32 ids;       // object ids
  Raster8 rgb;
};

/// Pinhole render; misses get the far plane as depth and the sky label.
Render render_pinhole(const Scene& scene, const PinholeIntrinsics& intr,
                      const RigidTransform& cam_to_world);

/// Fisheye render by direct per-pixel ray evaluation; outside the coverage
/// depth is NaN, labels kNoLabel and color black.
Render render_fisheye(const Scene& scene, const FisheyeIntrinsics& intr,
                      const RigidTransform& cam_to_world);

struct CubemapRender {
  CubemapFaceSet<float> depth;
  CubemapFaceSet<std::uint8_t> semantic;
  CubemapFaceSet<std::uint32_t> ids;
  CubemapFaceSet<std::uint8_t> rgb;
};

/// Five 90-degree pinhole faces around the camera; depth is plane depth
/// along each face axis.
CubemapRender render_cubemap(const Scene& scene, int face_size, const RigidTransform& cam_to_world);

}  // namespace fisheyegt::synth
