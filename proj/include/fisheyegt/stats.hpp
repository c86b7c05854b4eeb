#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fisheyegt/annotations.hpp"
#include "fisheyegt/classes.hpp"
#include "fisheyegt/motion.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// Pixel counts per semantic class. No-label pixels are not counted; ids
/// outside the class table count as unlabeled and are tallied separately.
struct ClassHistogram {
  std::array<std::uint64_t, kClassCount> counts{};
  std::uint64_t unknown = 0;

  void add(const Raster8& labels);
  void merge(const ClassHistogram& other);
  std::uint64_t total() const noexcept;
  double percent(int class_id) const noexcept;
};

/// Streams the label PNGs one at a time (palette or gray, class in the
/// first channel).
ClassHistogram class_pixel_histogram(std::span<const std::filesystem::path> label_files);

std::string histogram_csv(const ClassHistogram& h);
nlohmann::json histogram_to_json(const ClassHistogram& h);

inline constexpr std::array<double, 5> kTableThresholds = {0.0, 0.25, 0.5, 0.75, 1.0};

/// What the object statistics need from one frame.
struct FrameObjects {
  std::vector<BoxRecord> boxes;       // boxes at t
  std::vector<MotionRecord> motions;  // objects with poses at t-1 and t
  std::set<ObjectId> spawned;
};

FrameObjects frame_objects(const FrameBoxes& boxes, const FramePoses& poses);

struct ClassObjectStats {
  SemanticClass cls = SemanticClass::pedestrian;
  std::size_t frames_with = 0;          // frames containing the class
  std::size_t objects = 0;              // boxes over all frames
  std::vector<std::size_t> moving;      // per threshold
};

struct ObjectStats {
  std::size_t frames = 0;
  std::vector<double> thresholds;
  std::vector<ClassObjectStats> classes;  // pedestrian, four-wheeler, two-wheeler

  double percent_of_images(std::size_t c) const noexcept;
  double objects_per_image(std::size_t c) const noexcept;
  double moving_per_image(std::size_t c, std::size_t t) const noexcept;
};

/// Counts per class: frames containing it, objects, and objects whose
/// displacement is strictly above each threshold. Spawned objects never
/// count as moving.
ObjectStats object_statistics(std::span<const FrameObjects> frames,
                              std::span<const double> thresholds = kTableThresholds);

/// Aligned text table in the layout of the dataset statistics table.
std::string format_object_table(const ObjectStats& stats);
nlohmann::json object_stats_to_json(const ObjectStats& stats);

}  // namespace fisheyegt
