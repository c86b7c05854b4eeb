#pragma once

// Four hand-scripted frames for the object statistics, with the expected
// counts worked out by hand below.

#include <vector>

#include "fisheyegt/stats.hpp"

namespace testutil {

struct HandCounts {
  // pedestrian, four-wheeler, two-wheeler
  double percent[3];
  double per_image[3];
  double moving[3][5];  // thresholds 0, 0.25, 0.5, 0.75, 1.0
};

inline std::vector<fisheyegt::FrameObjects> hand_stats_frames() {
  using namespace fisheyegt;
  constexpr auto kPed = static_cast<std::uint8_t>(SemanticClass::pedestrian);
  constexpr auto kCar = static_cast<std::uint8_t>(SemanticClass::four_wheeler);
  constexpr auto kBike = static_cast<std::uint8_t>(SemanticClass::two_wheeler);
  constexpr auto kProp = static_cast<std::uint8_t>(SemanticClass::dynamic_object);
  auto box = [](ObjectId id, std::uint8_t cls) {
    return BoxRecord{OrientedBox3D(id, cls, Vec3(5, 0, 1), Vec3(1, 1, 1)), true};
  };
  auto moved = [](FramePoses& p, ObjectId id, double dx, double dy) {
    p.objects.prev[id] = RigidTransform();
    p.objects.curr[id] = RigidTransform(rotation_about_z(0.3), Vec3(dx, dy, 0));
  };
  std::vector<FrameObjects> out;

  // 0: pedestrians 1 (static) and 2 (0.3 m), car 10 (1.2 m), a non-road-user prop.
  FrameBoxes b0{{box(1, kPed), box(2, kPed), box(10, kCar), box(50, kProp)}, {}};
  FramePoses p0;
  moved(p0, 1, 0, 0);
  moved(p0, 2, 0.3, 0);
  moved(p0, 10, 0, 1.2);
  moved(p0, 50, 9, 0);
  out.push_back(frame_objects(b0, p0));

  // 1: pedestrian 1 (exactly 0.5 m), bike 20 (0.8 m), car 11 spawned.
  FrameBoxes b1{{box(1, kPed), box(20, kBike), box(11, kCar)}, {}};
  FramePoses p1;
  moved(p1, 1, 0.5, 0);
  moved(p1, 20, 0.8, 0);
  moved(p1, 11, 5, 0);
  p1.objects.spawned.insert(11);
  out.push_back(frame_objects(b1, p1));

  // 2: empty road.
  out.push_back(frame_objects(FrameBoxes{}, FramePoses{}));

  // 3: pedestrian 3 (exactly 0.25 m), car 10 (0.76 m), car 12 without a
  // previous pose, bike 20 (exactly 1.0 m).
  FrameBoxes b3{{box(3, kPed), box(10, kCar), box(12, kCar), box(20, kBike)}, {}};
  FramePoses p3;
  moved(p3, 3, 0, -0.25);
  moved(p3, 10, 0.76, 0);
  p3.objects.curr[12] = RigidTransform();
  moved(p3, 20, 0, 1.0);
  out.push_back(frame_objects(b3, p3));
  return out;
}

inline HandCounts hand_stats_expected() {
  return {{75.0, 75.0, 50.0},
          {1.0, 1.0, 0.5},
          {{0.75, 0.5, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.5, 0.5, 0.25}, {0.5, 0.5, 0.5, 0.5, 0.0}}};
}

}  // namespace testutil
