#pragma once

// Deterministic multi-camera dataset used by the end-to-end tests and the
// fisheyegt-synth tool.

#include <filesystem>
#include <vector>

#include "fisheyegt/annotations.hpp"
#include "fisheyegt/calibration.hpp"
#include "fisheyegt/events.hpp"
#include "scene.hpp"

namespace fisheyegt::synth {

struct FixtureOptions {
  /// Scales the 1280x966 image and its radial polynomial; 0.25 gives a
  /// 320x242 lens that renders quickly.
  double scale = 1.0;
  int face_size = 0;  // 0 = round(1280 * scale)
  int frames = 10;
};

/// The 1280x966 fixture lens scaled by `scale`.
FisheyeIntrinsics fixture_intrinsics(double scale);

/// front, rear, left, right on a car-sized rig.
std::vector<Calibration> fixture_calibrations(const FixtureOptions& options);

struct FixtureFrame {
  Scene curr;
  Scene prev;
  FrameBoxes boxes;
  FramePoses poses;
  std::string weather;
};

/// Scripted world at frame k: the ego drives +X at 1 m per frame past
/// parked and moving road users. Object 4 moves exactly 0.5 m per frame and
/// object 5 appears at frame 5.
FixtureFrame fixture_frame(int k);

/// Events between two renders of one face: log-intensity changes beyond a
/// contrast threshold, spread over the frame interval in time order.
std::vector<Event> synth_events(const Raster8& rgb_prev, const Raster8& rgb_curr, std::int64_t t_begin,
                                std::int64_t t_end);

/// Writes calibrations, cubemap faces (current and previous frame), events,
/// boxes, poses and meta files in the default layout.
void write_fixture(const std::filesystem::path& root, const FixtureOptions& options);

}  // namespace fisheyegt::synth
