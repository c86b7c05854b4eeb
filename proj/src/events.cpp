#include "fisheyegt/events.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <regex>
#include <string>

#include "fisheyegt/binary_io.hpp"
#include "fisheyegt/image_io.hpp"
#include "fisheyegt/parallel.hpp"

namespace fisheyegt {

void EventStream::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x >= width || e.y >= height) {
      throw DomainError(fmt::format("event {} at ({}, {}) outside {}x{}", i, e.x, e.y, width, height));
    }
    if (e.pol != 1 && e.pol != -1) {
      throw DomainError(fmt::format("event {} has polarity {}", i, e.pol));
    }
    if (i > 0 && e.t < events[i - 1].t) {
      throw DomainError(fmt::format("event {} goes back in time ({} < {})", i, e.t, events[i - 1].t));
    }
  }
}

ReverseLut::ReverseLut(int face_size, int fisheye_width, int fisheye_height,
                       std::vector<std::uint32_t> offsets, std::vector<std::uint32_t> targets)
    : face_size_(face_size),
      fisheye_width_(fisheye_width),
      fisheye_height_(fisheye_height),
      offsets_(std::move(offsets)),
      targets_(std::move(targets)) {
  const std::size_t cells = std::size_t{kFaceCount} * face_size * face_size;
  if (offsets_.size() != cells + 1 || offsets_.back() != targets_.size()) {
    throw DomainError("reverse LUT offsets do not match its targets");
  }
}

std::span<const std::uint32_t> ReverseLut::targets(CubeFace face, int u, int v) const noexcept {
  const std::size_t cell =
      (static_cast<std::size_t>(face) * face_size_ + v) * face_size_ + u;
  return std::span(targets_).subspan(offsets_[cell], offsets_[cell + 1] - offsets_[cell]);
}

ReverseLut invert_lut(const LookupTable& lut) {
  const int n = lut.face_size();
  const std::size_t cells = std::size_t{kFaceCount} * n * n;
  auto cell_of = [n](const LutEntry& e) {
    const int u = std::min(static_cast<int>(std::lround(e.u)), n - 1);
    const int v = std::min(static_cast<int>(std::lround(e.v)), n - 1);
    return (static_cast<std::size_t>(e.face) * n + v) * n + u;
  };
  // Counting sort; fisheye pixels are visited in ascending order, so each
  // target list comes out sorted.
  std::vector<std::uint32_t> offsets(cells + 1, 0);
  const auto entries = lut.entries();
  for (const auto& e : entries) {
    if (e.valid) ++offsets[cell_of(e) + 1];
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  std::vector<std::uint32_t> targets(offsets.back());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].valid) targets[cursor[cell_of(entries[i])]++] = static_cast<std::uint32_t>(i);
  }
  return ReverseLut(n, lut.width(), lut.height(), std::move(offsets), std::move(targets));
}

namespace {

struct Tagged {
  Event event;
  std::uint8_t face;
  std::uint16_t sy;
  std::uint16_t sx;
};

}  // namespace

EventRemapResult remap_events(std::span<const EventStream, kFaceCount> faces,
                              const ReverseLut& reverse) {
  for (int f = 0; f < kFaceCount; ++f) {
    const auto& ev = faces[f].events;
    for (std::size_t i = 1; i < ev.size(); ++i) {
      if (ev[i].t < ev[i - 1].t) {
        throw DomainError(fmt::format("face '{}' events are not time-ordered at index {}",
                                      face_name(kCubeFaces[f]), i));
      }
    }
  }

  const int n = reverse.face_size();
  const int fw = reverse.fisheye_width();
  std::array<std::vector<Tagged>, kFaceCount> expanded;
  std::array<std::size_t, kFaceCount> rejected{};
  parallel_for_rows(kFaceCount, [&](int f0, int f1) {
    for (int f = f0; f < f1; ++f) {
      auto& out = expanded[f];
      for (const Event& e : faces[f].events) {
        if (e.x >= n || e.y >= n) {
          ++rejected[f];
          continue;
        }
        for (std::uint32_t idx : reverse.targets(kCubeFaces[f], e.x, e.y)) {
          const Event o{static_cast<std::uint16_t>(idx % fw), static_cast<std::uint16_t>(idx / fw),
                        e.t, e.pol};
          out.push_back({o, static_cast<std::uint8_t>(f), e.y, e.x});
        }
      }
    }
  });

  std::vector<Tagged> merged;
  std::size_t total = 0;
  for (const auto& v : expanded) total += v.size();
  merged.reserve(total);
  for (auto& v : expanded) {
    merged.insert(merged.end(), v.begin(), v.end());
    std::vector<Tagged>().swap(v);
  }
  std::stable_sort(merged.begin(), merged.end(), [](const Tagged& a, const Tagged& b) {
    if (a.event.t != b.event.t) return a.event.t < b.event.t;
    if (a.face != b.face) return a.face < b.face;
    if (a.sy != b.sy) return a.sy < b.sy;
    return a.sx < b.sx;
  });

  EventRemapResult result;
  result.stream.width = fw;
  result.stream.height = reverse.fisheye_height();
  result.stream.events.reserve(merged.size());
  for (const auto& t : merged) result.stream.events.push_back(t.event);
  for (auto r : rejected) result.rejected += r;
  return result;
}

Raster8 render_events(const EventStream& stream, std::int64_t t0, std::int64_t t1) {
  if (t0 > t1) throw DomainError(fmt::format("empty window [{}, {}]", t0, t1));
  Raster8 out(stream.width, stream.height, 3);
  std::vector<std::int64_t> latest(out.pixel_count(), std::numeric_limits<std::int64_t>::min());
  for (const Event& e : stream.events) {
    if (e.t < t0 || e.t > t1 || e.x >= stream.width || e.y >= stream.height) continue;
    auto& seen = latest[static_cast<std::size_t>(e.y) * stream.width + e.x];
    if (e.t < seen) continue;
    seen = e.t;
    const Rgb c = e.pol > 0 ? kPositiveEventColor : kNegativeEventColor;
    std::uint8_t* p = out.pixel(e.x, e.y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  return out;
}

namespace {

constexpr std::string_view kNpyMagic = "\x93NUMPY";

struct NpyField {
  std::string name;
  char kind;  // 'u', 'i' or 'b'
  int size;
  std::size_t offset;
};

NpyField parse_field(const std::string& name, const std::string& type, std::size_t offset) {
  if (type.size() < 3) throw FormatError(fmt::format("NPY: unsupported type '{}'", type));
  const char order = type[0];
  const char kind = type[1];
  const int size = std::stoi(type.substr(2));
  const bool little = order == '<' || order == '|' ||
                      (order == '=' && std::endian::native == std::endian::little);
  if (!little || (size > 1 && order == '|') || (kind != 'u' && kind != 'i' && kind != 'b') ||
      (size != 1 && size != 2 && size != 4 && size != 8) || (kind == 'b' && size != 1)) {
    throw FormatError(fmt::format("NPY: field '{}' has unsupported type '{}'", name, type));
  }
  return {name, kind, size, offset};
}

std::int64_t read_field(const std::byte* rec, const NpyField& f) {
  std::uint64_t raw = 0;
  static_assert(std::endian::native == std::endian::little);
  std::memcpy(&raw, rec + f.offset, static_cast<std::size_t>(f.size));
  if (f.kind == 'i' && f.size < 8) {
    const int shift = 64 - 8 * f.size;
    return static_cast<std::int64_t>(raw << shift) >> shift;
  }
  return static_cast<std::int64_t>(raw);
}

}  // namespace

std::vector<std::byte> encode_events_npy(std::span<const Event> events) {
  std::string header = fmt::format(
      "{{'descr': [('x', '<u2'), ('y', '<u2'), ('t', '<i8'), ('pol', '|i1')], "
      "'fortran_order': False, 'shape': ({},), }}",
      events.size());
  const std::size_t preamble = kNpyMagic.size() + 2 + 2;
  const std::size_t padded = (preamble + header.size() + 1 + 63) / 64 * 64;
  header.append(padded - preamble - header.size() - 1, ' ');
  header += '\n';

  std::vector<std::byte> out;
  out.reserve(padded + events.size() * 13);
  binary::Writer w(out);
  w.put_text(kNpyMagic);
  w.put(std::uint8_t{1});
  w.put(std::uint8_t{0});
  w.put(static_cast<std::uint16_t>(header.size()));
  w.put_text(header);
  for (const Event& e : events) {
    w.put(e.x);
    w.put(e.y);
    w.put(e.t);
    w.put(e.pol);
  }
  return out;
}

std::vector<Event> decode_events_npy(std::span<const std::byte> bytes) {
  binary::Reader r(bytes, "NPY");
  const auto magic = r.get_bytes(kNpyMagic.size());
  if (std::memcmp(magic.data(), kNpyMagic.data(), kNpyMagic.size()) != 0) {
    throw FormatError("NPY: bad magic");
  }
  const auto major = r.get<std::uint8_t>();
  r.get<std::uint8_t>();
  std::size_t header_len = 0;
  if (major == 1) {
    header_len = r.get<std::uint16_t>();
  } else if (major == 2 || major == 3) {
    header_len = r.get<std::uint32_t>();
  } else {
    throw FormatError(fmt::format("NPY: unsupported format version {}", major));
  }
  const auto raw_header = r.get_bytes(header_len);
  const std::string header(reinterpret_cast<const char*>(raw_header.data()), raw_header.size());

  if (!std::regex_search(header, std::regex(R"('fortran_order'\s*:\s*False)"))) {
    throw FormatError("NPY: Fortran-ordered arrays are not supported");
  }
  std::smatch shape;
  if (!std::regex_search(header, shape, std::regex(R"('shape'\s*:\s*\(\s*(\d+)\s*,?\s*\))"))) {
    throw FormatError("NPY: expected a one-dimensional array");
  }
  const std::size_t count = std::stoull(shape[1].str());

  const auto descr_at = header.find("'descr'");
  const auto list_begin = header.find('[', descr_at);
  const auto list_end = header.find(']', list_begin);
  if (descr_at == std::string::npos || list_begin == std::string::npos ||
      list_end == std::string::npos) {
    throw FormatError("NPY: expected a structured dtype");
  }
  const std::string descr = header.substr(list_begin, list_end - list_begin);
  static const std::regex field_re(R"(\(\s*'([^']*)'\s*,\s*'([^']*)'\s*(,[^)]*)?\))");
  std::vector<NpyField> fields;
  std::size_t itemsize = 0;
  for (std::sregex_iterator it(descr.begin(), descr.end(), field_re), end; it != end; ++it) {
    if ((*it)[3].matched) throw FormatError("NPY: sub-array fields are not supported");
    fields.push_back(parse_field((*it)[1].str(), (*it)[2].str(), itemsize));
    itemsize += static_cast<std::size_t>(fields.back().size);
  }
  auto field = [&](std::string_view name) -> const NpyField& {
    for (const auto& f : fields) {
      if (f.name == name) return f;
    }
    throw FormatError(fmt::format("NPY: missing field '{}'", name));
  };
  const NpyField& fx = field("x");
  const NpyField& fy = field("y");
  const NpyField& ft = field("t");
  const NpyField& fp = field("pol");

  if (r.remaining() != count * itemsize) {
    throw FormatError(r.remaining() < count * itemsize ? "NPY: truncated stream"
                                                       : "NPY: trailing bytes after the array");
  }
  const auto payload = r.get_bytes(count * itemsize);
  std::vector<Event> events(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::byte* rec = payload.data() + i * itemsize;
    const auto x = read_field(rec, fx);
    const auto y = read_field(rec, fy);
    const auto p = read_field(rec, fp);
    if (x < 0 || y < 0 || x > 0xffff || y > 0xffff) {
      throw FormatError(fmt::format("NPY: event {} has coordinates ({}, {})", i, x, y));
    }
    std::int8_t pol = 0;
    if (fp.kind == 'b') {
      pol = p != 0 ? 1 : -1;
    } else if (p == 1 || p == -1) {
      pol = static_cast<std::int8_t>(p);
    } else {
      throw FormatError(fmt::format("NPY: event {} has polarity {}", i, p));
    }
    events[i] = {static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), read_field(rec, ft), pol};
  }
  return events;
}

void write_events_npy(const std::filesystem::path& path, std::span<const Event> events) {
  write_file(path, encode_events_npy(events));
}

EventStream read_events_npy(const std::filesystem::path& path, int width, int height) {
  // Out-of-range coordinates are kept; remap_events counts them as rejected.
  return EventStream{width, height, decode_events_npy(read_file(path))};
}

}  // namespace fisheyegt
