#include "fisheyegt/motion.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>
#include <unordered_map>

#include "fisheyegt/image_io.hpp"

namespace fisheyegt {

std::vector<MotionRecord> motion_distances(const TransformMap& prev, const TransformMap& curr) {
  std::vector<MotionRecord> out;
  for (const auto& [id, t_curr] : curr) {
    const auto it = prev.find(id);
    if (it == prev.end()) continue;
    out.push_back({id, (t_curr.translation() - it->second.translation()).norm()});
  }
  return out;
}

Raster8 motion_mask(const Raster32& ids, std::span<const MotionRecord> records, double threshold) {
  if (!(threshold >= 0.0)) {
    throw DomainError(fmt::format("motion threshold must be >= 0, got {}", threshold));
  }
  std::unordered_map<ObjectId, bool> moving;
  for (const auto& r : records) moving[r.object_id] = r.displacement > threshold;
  auto mask = Raster8::labels(ids.width(), ids.height());
  auto src = ids.data();
  auto dst = mask.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == 0) continue;
    const auto it = moving.find(src[i]);
    if (it != moving.end() && it->second) dst[i] = 1;
  }
  return mask;
}

std::string format_motions(std::span<const MotionRecord> records) {
  std::string out;
  for (const auto& r : records) out += fmt::format("{} {}\n", r.object_id, r.displacement);
  return out;
}

std::vector<MotionRecord> parse_motions(const std::string& text) {
  std::vector<MotionRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string id_text;
    std::string dist_text;
    std::string extra;
    fields >> id_text >> dist_text;
    MotionRecord r;
    const auto* id_end = id_text.data() + id_text.size();
    const auto* d_end = dist_text.data() + dist_text.size();
    if (dist_text.empty() || (fields >> extra) ||
        std::from_chars(id_text.data(), id_end, r.object_id).ptr != id_end ||
        std::from_chars(dist_text.data(), d_end, r.displacement).ptr != d_end ||
        r.displacement < 0.0) {
      throw FormatError(fmt::format("motions line {}: expected 'object_id displacement'", line_no));
    }
    out.push_back(r);
  }
  return out;
}

void write_motions(const std::filesystem::path& path, std::span<const MotionRecord> records) {
  const std::string text = format_motions(records);
  write_file(path, std::as_bytes(std::span(text)));
}

std::vector<MotionRecord> read_motions(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_motions(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace fisheyegt
