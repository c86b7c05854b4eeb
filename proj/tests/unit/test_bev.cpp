#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fisheyegt/bev.hpp"
#include "fisheyegt/classes.hpp"
#include "fixture.hpp"
#include "test_util.hpp"

using namespace fisheyegt;
using doctest::Approx;

namespace {

Calibration front_calibration() {
  synth::FixtureOptions opt;
  for (auto& c : synth::fixture_calibrations(opt)) {
    if (c.role == CameraRole::front) return c;
  }
  throw std::logic_error("fixture has no front camera");
}

}  // namespace

TEST_CASE("grid cell geometry") {
  const BevGrid g;
  CHECK(g.resolution() == 0.0390625);
  const Vec2 c = g.cell_center(0, 0);
  CHECK(c.x() == 19.98046875);
  CHECK(c.y() == 19.98046875);
  CHECK(g.cell_center(1023, 1023) == Vec2(-19.98046875, -19.98046875));
  CHECK(g.cell_of(19.99, 19.99) == std::array<int, 2>{0, 0});
  CHECK(g.cell_of(0.01, -0.01) == std::array<int, 2>{511, 512});
  CHECK_FALSE(g.cell_of(20.0001, 0).has_value());
  CHECK_FALSE(g.cell_of(0, -20.0).has_value());
  CHECK(g.cell_of(20.0, 0).has_value());
  CHECK_THROWS_AS((BevGrid{0.0, 10}.validate()), DomainError);
  CHECK_THROWS_AS((BevGrid{10.0, 0}.validate()), DomainError);

  testutil::Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    const BevGrid grid{rng.uniform(1, 100), rng.integer(1, 2000)};
    const int i = rng.integer(0, grid.cells - 1);
    const int j = rng.integer(0, grid.cells - 1);
    const Vec2 p = grid.cell_center(i, j);
    CHECK(grid.cell_of(p.x(), p.y()) == std::array<int, 2>{i, j});
  }
}

TEST_CASE("roles") {
  CHECK(parse_role("rear") == CameraRole::rear);
  CHECK_FALSE(parse_role("back").has_value());
  for (auto r : {CameraRole::front, CameraRole::rear, CameraRole::left, CameraRole::right}) {
    CHECK(parse_role(role_name(r)) == r);
  }
}

TEST_CASE("ground points of fisheye pixels") {
  const Calibration cal = front_calibration();
  testutil::Rng rng(8);
  int tested = 0;
  for (int k = 0; k < 5000; ++k) {
    const Vec3 g(rng.uniform(4, 30), rng.uniform(-15, 15), 0.0);
    const Vec3 cam = cal.cam_to_ego.inverse().apply(g);
    if (std::acos(cam.normalized().z()) > cal.intr.theta_max()) continue;
    const Vec2 px = testutil::oracle_fisheye_project(cal.intr, cam);
    const auto back = pixel_to_ground(cal.intr, cal.cam_to_ego, px);
    REQUIRE(back.has_value());
    CHECK((*back - g).norm() < 1e-6 * (1 + g.norm()));
    ++tested;
  }
  CHECK(tested > 1000);
  // The principal ray of a camera pitched down reaches the ground; the top row does not.
  CHECK(pixel_to_ground(cal.intr, cal.cam_to_ego, Vec2(cal.intr.cx(), cal.intr.cy())).has_value());
  CHECK_FALSE(pixel_to_ground(cal.intr, cal.cam_to_ego, Vec2(cal.intr.cx(), 0)).has_value());
}

TEST_CASE("painted ground reprojects cell by cell") {
  const Calibration cal = front_calibration();
  synth::Scene scene;
  scene.ground = synth::Ground{1.0};
  const auto render = synth::render_fisheye(scene, cal.intr, cal.cam_to_ego);
  const BevGrid grid{20.0, 400};
  const BevLayer layer = ipm_project(render.semantic, cal.intr, cal.cam_to_ego, grid, CameraRole::front);
  CHECK(layer.role == CameraRole::front);
  CHECK(layer.optical_center == cal.cam_to_ego.translation());

  const RigidTransform ego_to_cam = cal.cam_to_ego.inverse();
  int resolved = 0;
  int hits = 0;
  for (int i = 0; i < grid.cells; ++i) {
    for (int j = 0; j < grid.cells; ++j) {
      const Vec2 c = grid.cell_center(i, j);
      const Vec3 cam = ego_to_cam.apply(Vec3(c.x(), c.y(), 0));
      const bool in_view = std::acos(cam.normalized().z()) <= cal.intr.theta_max();
      const Vec2 px = testutil::oracle_fisheye_project(cal.intr, cam);
      const long u = std::lround(px.x());
      const long v = std::lround(px.y());
      const bool inside = in_view && u >= 0 && v >= 0 && u < cal.intr.width() && v < cal.intr.height() &&
                          render.semantic.at(static_cast<int>(u), static_cast<int>(v)) != kNoLabel;
      CHECK(layer.hits.at(j, i) == (inside ? 1 : 0));
      if (!inside) continue;
      ++hits;
      // Cells resolved by the lens: the sampled pixel sees a ground point
      // in the same cell, so its paint must be the cell's paint.
      const auto seen = pixel_to_ground(cal.intr, cal.cam_to_ego, Vec2(u, v));
      REQUIRE(seen.has_value());
      CHECK(layer.labels.at(j, i) == scene.ground->label_at(seen->x(), seen->y()));
      if (!seen || grid.cell_of(seen->x(), seen->y()) != std::array<int, 2>{i, j}) continue;
      ++resolved;
      CHECK(layer.labels.at(j, i) == scene.ground->label_at(c.x(), c.y()));
    }
  }
  MESSAGE("hits " << hits << ", resolved " << resolved);
  CHECK(resolved > 5000);
}

TEST_CASE("fusion picks the closest camera") {
  const BevGrid grid{8.0, 8};
  auto make = [&](CameraRole role, Vec3 center, std::uint8_t label) {
    return BevLayer{role, center, Raster8::labels(8, 8, label), Raster8::labels(8, 8, 1)};
  };
  std::vector<BevLayer> layers = {make(CameraRole::front, Vec3(3, 0, 1), 1), make(CameraRole::rear, Vec3(-3, 0, 1), 2)};
  auto fused = fuse_bev(layers, grid);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) CHECK(fused.labels.at(j, i) == (i < 4 ? 1 : 2));
  }
  layers[0].hits.at(0, 0) = 0;
  layers[1].hits.at(0, 0) = 0;
  fused = fuse_bev(layers, grid);
  CHECK(fused.labels.at(0, 0) == kNoLabel);
  CHECK(fused.hits.at(0, 0) == 0);

  // Equidistant cameras fall back to role precedence.
  const std::vector<BevLayer> tie = {make(CameraRole::right, Vec3(0, 0, 1), 4), make(CameraRole::left, Vec3(0, 0, 1), 3)};
  CHECK(fuse_bev(tie, grid).labels.at(2, 5) == 3);

  CHECK_THROWS_AS(fuse_bev(std::vector<BevLayer>{make(CameraRole::front, Vec3::Zero(), 1)}, BevGrid{8.0, 9}), DomainError);
}

TEST_CASE("fusion ignores layer order") {
  testutil::Rng rng(12);
  const BevGrid grid{10.0, 40};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BevLayer> layers;
    for (auto role : {CameraRole::front, CameraRole::rear, CameraRole::left, CameraRole::right}) {
      BevLayer l{role, Vec3(rng.integer(-2, 2), rng.integer(-1, 1), 1), Raster8::labels(40, 40), Raster8::labels(40, 40)};
      for (auto& v : l.labels.data()) v = static_cast<std::uint8_t>(rng.integer(0, 20));
      for (auto& v : l.hits.data()) v = rng.coin() ? 1 : 0;
      layers.push_back(std::move(l));
    }
    const auto ref = fuse_bev(layers, grid);
    // Per-cell oracle.
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 40; ++j) {
        const Vec2 c = grid.cell_center(i, j);
        const BevLayer* best = nullptr;
        for (const auto& l : layers) {
          if (!l.hits.at(j, i)) continue;
          const double d = (l.optical_center - Vec3(c.x(), c.y(), 0)).norm();
          const double bd = best ? (best->optical_center - Vec3(c.x(), c.y(), 0)).norm() : 0;
          if (!best || d < bd - 1e-9 || (std::abs(d - bd) <= 1e-9 && l.role < best->role)) best = &l;
        }
        CHECK(ref.labels.at(j, i) == (best ? best->labels.at(j, i) : kNoLabel));
      }
    }
    std::sort(layers.begin(), layers.end(), [](const BevLayer& a, const BevLayer& b) { return a.role < b.role; });
    do {
      const auto f = fuse_bev(layers, grid);
      CHECK(f.labels == ref.labels);
      CHECK(f.hits == ref.hits);
    } while (std::next_permutation(layers.begin(), layers.end(),
                                   [](const BevLayer& a, const BevLayer& b) { return a.role < b.role; }));
  }
}

TEST_CASE("height map recovers a curb") {
  const Calibration cal = front_calibration();
  const double curb = 0.12;
  synth::Scene scene;
  scene.ground = synth::Ground{1.0};
  const Vec3 center(7.0, 0.5, curb / 2);
  const Vec3 half(1.5, 1.0, curb / 2);
  scene.boxes.push_back({OrientedBox3D(1000, static_cast<std::uint8_t>(SemanticClass::sidewalk), center, half), {}});
  const auto render = synth::render_fisheye(scene, cal.intr, cal.cam_to_ego);
  const BevGrid grid{20.0, 400};
  const BevDepthSource src{&render.depth, cal.intr, cal.cam_to_ego};
  const RasterF height = bev_height(std::span(&src, 1), grid);
  const double res = grid.resolution();
  int top = 0;
  int ground = 0;
  for (int i = 0; i < grid.cells; ++i) {
    for (int j = 0; j < grid.cells; ++j) {
      const float h = height.at(j, i);
      if (std::isnan(h)) continue;
      const Vec2 c = grid.cell_center(i, j);
      const double dx = std::abs(c.x() - center.x()) - half.x();
      const double dy = std::abs(c.y() - center.y()) - half.y();
      if (dx < -res && dy < -res) {
        CHECK(std::abs(h - curb) <= res);
        ++top;
      } else if (dx > res || dy > res) {
        CHECK(std::abs(h) <= res);
        ++ground;
      }
    }
  }
  CHECK(top > 1000);
  CHECK(ground > 10000);
  CHECK_THROWS_AS(bev_height(std::span(&src, 1), BevGrid{-1.0, 4}), DomainError);
}
