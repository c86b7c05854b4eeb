#include "fisheyegt/stats.hpp"

#include <fmt/format.h>

#include <map>

#include "fisheyegt/image_io.hpp"

namespace fisheyegt {

void ClassHistogram::add(const Raster8& labels) {
  const int ch = labels.channels();
  const auto data = labels.data();
  for (std::size_t i = 0; i < data.size(); i += static_cast<std::size_t>(ch)) {
    const std::uint8_t v = data[i];
    if (v == kNoLabel) continue;
    if (v < kClassCount) {
      ++counts[v];
    } else {
      ++counts[static_cast<int>(SemanticClass::unlabeled)];
      ++unknown;
    }
  }
}

void ClassHistogram::merge(const ClassHistogram& other) {
  for (int c = 0; c < kClassCount; ++c) counts[c] += other.counts[c];
  unknown += other.unknown;
}

std::uint64_t ClassHistogram::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double ClassHistogram::percent(int class_id) const noexcept {
  const auto t = total();
  if (t == 0 || class_id < 0 || class_id >= kClassCount) return 0.0;
  return 100.0 * static_cast<double>(counts[class_id]) / static_cast<double>(t);
}

ClassHistogram class_pixel_histogram(std::span<const std::filesystem::path> label_files) {
  ClassHistogram h;
  for (const auto& path : label_files) h.add(read_png8(path));
  return h;
}

std::string histogram_csv(const ClassHistogram& h) {
  std::string out = "class_id,name,pixels,percent\n";
  for (const auto& c : class_table()) {
    out += fmt::format("{},{},{},{:.6f}\n", c.id, c.name, h.counts[c.id], h.percent(c.id));
  }
  return out;
}

nlohmann::json histogram_to_json(const ClassHistogram& h) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : class_table()) {
    classes.push_back({{"id", c.id}, {"name", c.name}, {"pixels", h.counts[c.id]},
                       {"percent", h.percent(c.id)}});
  }
  return {{"total_pixels", h.total()}, {"unknown_ids", h.unknown}, {"classes", classes}};
}

FrameObjects frame_objects(const FrameBoxes& boxes, const FramePoses& poses) {
  return {boxes.curr, motion_distances(poses.objects.prev, poses.objects.curr),
          poses.objects.spawned};
}

double ObjectStats::percent_of_images(std::size_t c) const noexcept {
  return frames == 0 ? 0.0 : 100.0 * static_cast<double>(classes[c].frames_with) / static_cast<double>(frames);
}

double ObjectStats::objects_per_image(std::size_t c) const noexcept {
  return frames == 0 ? 0.0 : static_cast<double>(classes[c].objects) / static_cast<double>(frames);
}

double ObjectStats::moving_per_image(std::size_t c, std::size_t t) const noexcept {
  return frames == 0 ? 0.0 : static_cast<double>(classes[c].moving[t]) / static_cast<double>(frames);
}

ObjectStats object_statistics(std::span<const FrameObjects> frames, std::span<const double> thresholds) {
  ObjectStats stats;
  stats.frames = frames.size();
  stats.thresholds.assign(thresholds.begin(), thresholds.end());
  for (auto cls : kInstanceClasses) {
    stats.classes.push_back({cls, 0, 0, std::vector<std::size_t>(thresholds.size(), 0)});
  }
  for (const auto& f : frames) {
    std::map<ObjectId, double> displacement;
    for (const auto& m : f.motions) displacement[m.object_id] = m.displacement;
    for (auto& cs : stats.classes) {
      bool present = false;
      for (const auto& b : f.boxes) {
        if (b.box.class_id() != static_cast<std::uint8_t>(cs.cls)) continue;
        present = true;
        ++cs.objects;
        const ObjectId id = b.box.object_id();
        const auto it = displacement.find(id);
        if (it == displacement.end() || f.spawned.contains(id)) continue;
        for (std::size_t t = 0; t < thresholds.size(); ++t) {
          if (it->second > thresholds[t]) ++cs.moving[t];
        }
      }
      if (present) ++cs.frames_with;
    }
  }
  return stats;
}

std::string format_object_table(const ObjectStats& stats) {
  std::vector<std::string> names;
  std::size_t width = 5;
  for (const auto& cs : stats.classes) {
    std::string name(class_info(cs.cls).name);
    if (!name.empty()) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    width = std::max(width, name.size() + 1);
    names.push_back(std::move(name));
  }
  std::string header = fmt::format("{:<{}}| {:>12} {:>14} |", "Class", width, "% of images", "objects/image");
  for (double t : stats.thresholds) header += fmt::format(" {:>6}", fmt::format("{:.2f}", t));
  std::string out = fmt::format("{:<{}}| {:^27} | {}\n", "", width, "All objects", "Moving objects (threshold, m)");
  out += header + "\n";
  out += std::string(header.size(), '-') + "\n";
  for (std::size_t c = 0; c < stats.classes.size(); ++c) {
    std::string row = fmt::format("{:<{}}| {:>12.2f} {:>14.2f} |", names[c], width, stats.percent_of_images(c),
                                  stats.objects_per_image(c));
    for (std::size_t t = 0; t < stats.thresholds.size(); ++t) {
      row += fmt::format(" {:>6.2f}", stats.moving_per_image(c, t));
    }
    out += row + "\n";
  }
  return out;
}

nlohmann::json object_stats_to_json(const ObjectStats& stats) {
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < stats.classes.size(); ++c) {
    const auto& cs = stats.classes[c];
    nlohmann::json moving = nlohmann::json::array();
    for (std::size_t t = 0; t < stats.thresholds.size(); ++t) {
      moving.push_back({{"threshold_m", stats.thresholds[t]}, {"objects", cs.moving[t]},
                        {"per_image", stats.moving_per_image(c, t)}});
    }
    classes.push_back({{"class", class_info(cs.cls).name},
                       {"class_id", static_cast<int>(cs.cls)},
                       {"frames_with_class", cs.frames_with},
                       {"percent_of_images", stats.percent_of_images(c)},
                       {"objects", cs.objects},
                       {"objects_per_image", stats.objects_per_image(c)},
                       {"moving", moving}});
  }
  return {{"frames", stats.frames}, {"classes", classes}};
}

}  // namespace fisheyegt
