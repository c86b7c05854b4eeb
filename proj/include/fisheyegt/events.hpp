#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fisheyegt/cubemap.hpp"
#include "fisheyegt/lut.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int64_t t = 0;  // microseconds
  std::int8_t pol = 1; // +1 brighter, -1 darker

  bool operator==(const Event&) const = default;
};

struct EventStream {
  int width = 0;
  int height = 0;
  std::vector<Event> events;

  /// Throws DomainError on decreasing timestamps, coordinates outside the
  /// declared size or a polarity other than +-1.
  void validate() const;
};

/// For every cubemap pixel, the fisheye pixels whose nearest LUT source it
/// is. Stored compressed: offsets over (face, v, u), targets as linear
/// fisheye indices in ascending order.
class ReverseLut {
 public:
  ReverseLut(int face_size, int fisheye_width, int fisheye_height,
             std::vector<std::uint32_t> offsets, std::vector<std::uint32_t> targets);

  int face_size() const noexcept { return face_size_; }
  int fisheye_width() const noexcept { return fisheye_width_; }
  int fisheye_height() const noexcept { return fisheye_height_; }
  std::span<const std::uint32_t> targets(CubeFace face, int u, int v) const noexcept;
  std::size_t target_count() const noexcept { return targets_.size(); }

 private:
  int face_size_;
  int fisheye_width_;
  int fisheye_height_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

ReverseLut invert_lut(const LookupTable& lut);

struct EventRemapResult {
  EventStream stream;
  std::size_t rejected = 0;  // source events outside their face
};

/// Fans each face event out to every fisheye pixel registered for its
/// source pixel, keeping (t, pol). The merged stream is ordered by t, then
/// face, then source row and column; events with identical keys keep their
/// input order. Throws DomainError when a face stream is not time-ordered.
EventRemapResult remap_events(std::span<const EventStream, kFaceCount> faces,
                              const ReverseLut& reverse);

/// Events with t0 <= t <= t1, latest event per pixel: blue for positive,
/// red for negative, black elsewhere.
Raster8 render_events(const EventStream& stream, std::int64_t t0, std::int64_t t1);

inline constexpr Rgb kPositiveEventColor{0, 0, 255};
inline constexpr Rgb kNegativeEventColor{255, 0, 0};

/// NPY container holding a structured array x:<u2, y:<u2, t:<i8, pol:|i1.
std::vector<std::byte> encode_events_npy(std::span<const Event> events);
/// Accepts format versions 1-3 and any little-endian integer or boolean
/// field types for x, y, t, pol (boolean polarity maps to +1/-1).
std::vector<Event> decode_events_npy(std::span<const std::byte> bytes);

void write_events_npy(const std::filesystem::path& path, std::span<const Event> events);
EventStream read_events_npy(const std::filesystem::path& path, int width, int height);

}  // namespace fisheyegt
