#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// Semantic classes in the order of the dataset label list.
enum class SemanticClass : std::uint8_t {
  unlabeled = 0,
  building = 1,
  fence = 2,
  other = 3,
  pedestrian = 4,
  pole = 5,
  road_line = 6,
  road = 7,
  sidewalk = 8,
  vegetation = 9,
  four_wheeler = 10,
  wall = 11,
  traffic_sign = 12,
  sky = 13,
  ground = 14,
  bridge = 15,
  rail_track = 16,
  guard_rail = 17,
  traffic_light = 18,
  water = 19,
  terrain = 20,
  two_wheeler = 21,
  static_object = 22,
  dynamic_object = 23,
  ego_vehicle = 24,
};

inline constexpr int kClassCount = 25;
inline constexpr int kClassTableVersion = 1;

/// Written into 8-bit label rasters where no label exists (outside the
/// fisheye coverage, BEV cells nobody sees).
inline constexpr std::uint8_t kNoLabel = 255;

struct ClassInfo {
  std::uint8_t id;
  std::string_view name;
  Rgb color;
};

std::span<const ClassInfo> class_table() noexcept;
const ClassInfo& class_info(SemanticClass c) noexcept;
std::optional<SemanticClass> class_from_id(int id) noexcept;
std::optional<SemanticClass> class_from_name(std::string_view name) noexcept;

/// Pedestrians, four-wheelers and two-wheelers carry instance ids.
bool is_instance_class(std::uint8_t class_id) noexcept;

inline constexpr std::array<SemanticClass, 3> kInstanceClasses = {
    SemanticClass::pedestrian, SemanticClass::four_wheeler, SemanticClass::two_wheeler};

/// 256-entry palette for indexed PNGs; the no-label index maps to black and
/// unused indices to a magenta that stands out.
std::array<Rgb, 256> label_palette() noexcept;

}  // namespace fisheyegt
