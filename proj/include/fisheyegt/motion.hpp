#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fisheyegt/geometry.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// Object poses (object-to-world) keyed by id.
using TransformMap = std::map<ObjectId, RigidTransform>;

struct MotionRecord {
  ObjectId object_id = 0;
  double displacement = 0.0;  // meters travelled by the object origin

  bool operator==(const MotionRecord&) const = default;
};

inline constexpr double kDefaultMotionThreshold = 0.5;

/// Distance travelled between the two frames by every object present in
/// both maps, in ascending id order. Rotation does not count.
std::vector<MotionRecord> motion_distances(const TransformMap& prev, const TransformMap& curr);

/// 1 where the pixel's object moved strictly more than `threshold`, else 0.
/// Throws DomainError for a negative threshold.
Raster8 motion_mask(const Raster32& ids, std::span<const MotionRecord> records, double threshold);

/// "id displacement" lines with shortest round-trip decimal formatting.
std::string format_motions(std::span<const MotionRecord> records);
std::vector<MotionRecord> parse_motions(const std::string& text);

void write_motions(const std::filesystem::path& path, std::span<const MotionRecord> records);
std::vector<MotionRecord> read_motions(const std::filesystem::path& path);

}  // namespace fisheyegt
