#include "fisheyegt/classes.hpp"

namespace fisheyegt {
namespace {

constexpr std::array<ClassInfo, kClassCount> kClasses = {{
    {0, "unlabeled", {0, 0, 0}},
    {1, "building", {70, 70, 70}},
    {2, "fence", {100, 40, 40}},
    {3, "other", {55, 90, 80}},
    {4, "pedestrian", {220, 20, 60}},
    {5, "pole", {153, 153, 153}},
    {6, "road line", {157, 234, 50}},
    {7, "road", {128, 64, 128}},
    {8, "sidewalk", {244, 35, 232}},
    {9, "vegetation", {107, 142, 35}},
    {10, "four-wheeler vehicle", {0, 0, 142}},
    {11, "wall", {102, 102, 156}},
    {12, "traffic sign", {220, 220, 0}},
    {13, "sky", {70, 130, 180}},
    {14, "ground", {81, 0, 81}},
    {15, "bridge", {150, 100, 100}},
    {16, "rail track", {230, 150, 140}},
    {17, "guard rail", {180, 165, 180}},
    {18, "traffic light", {250, 170, 30}},
    {19, "water", {45, 60, 150}},
    {20, "terrain", {145, 170, 100}},
    {21, "two-wheeler vehicle", {119, 11, 32}},
    {22, "static", {110, 190, 160}},
    {23, "dynamic", {170, 120, 50}},
    {24, "ego vehicle", {255, 255, 255}},
}};

}  // namespace

std::span<const ClassInfo> class_table() noexcept { return kClasses; }

const ClassInfo& class_info(SemanticClass c) noexcept { return kClasses[static_cast<int>(c)]; }

std::optional<SemanticClass> class_from_id(int id) noexcept {
  if (id < 0 || id >= kClassCount) return std::nullopt;
  return static_cast<SemanticClass>(id);
}

std::optional<SemanticClass> class_from_name(std::string_view name) noexcept {
  for (const auto& c : kClasses) {
    if (c.name == name) return static_cast<SemanticClass>(c.id);
  }
  return std::nullopt;
}

bool is_instance_class(std::uint8_t class_id) noexcept {
  for (auto c : kInstanceClasses) {
    if (class_id == static_cast<std::uint8_t>(c)) return true;
  }
  return false;
}

std::array<Rgb, 256> label_palette() noexcept {
  std::array<Rgb, 256> palette;
  palette.fill(Rgb{255, 0, 255});
  for (const auto& c : kClasses) palette[c.id] = c.color;
  palette[kNoLabel] = Rgb{0, 0, 0};
  return palette;
}

}  // namespace fisheyegt
