#include "fisheyegt/lut.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fisheyegt/binary_io.hpp"
#include "fisheyegt/image_io.hpp"
#include "fisheyegt/parallel.hpp"

namespace fisheyegt {

LookupTable::LookupTable(LutHeader header, std::vector<LutEntry> entries)
    : header_(header), entries_(std::move(entries)) {
  if (header_.fisheye_width <= 0 || header_.fisheye_height <= 0 || header_.face_size <= 0) {
    throw DomainError("lookup table dimensions must be positive");
  }
  if (entries_.size() !=
      static_cast<std::size_t>(header_.fisheye_width) * header_.fisheye_height) {
    throw DomainError("lookup table entry count does not match its dimensions");
  }
}

std::size_t LookupTable::valid_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const LutEntry& e) { return e.valid; }));
}

std::array<float, 4> bilinear_weights(float u, float v) noexcept {
  const float fx = u - std::floor(u);
  const float fy = v - std::floor(v);
  return {(1.0f - fx) * (1.0f - fy), fx * (1.0f - fy), (1.0f - fx) * fy, fx * fy};
}

Digest intrinsics_fingerprint(const FisheyeIntrinsics& intr) {
  const auto& a = intr.coeffs();
  return sha256(fmt::format("polynomial4;{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{};{};{:.17g}",
                            a[0], a[1], a[2], a[3], intr.cx(), intr.cy(), intr.width(),
                            intr.height(), intr.theta_max()));
}

LookupTable build_lut(const FisheyeIntrinsics& intr, int face_size,
                      std::optional<Digest> fingerprint) {
  if (face_size <= 0) throw DomainError(fmt::format("face size {} must be positive", face_size));
  if (intr.theta_max() > max_five_face_theta()) {
    throw DomainError(fmt::format(
        "theta_max {:.4f} rad reaches the missing back face (limit {:.4f} rad)", intr.theta_max(),
        max_five_face_theta()));
  }

  const int width = intr.width();
  const int height = intr.height();
  const double hi = face_size - 1.0;
  std::vector<LutEntry> entries(static_cast<std::size_t>(width) * height);

  parallel_for_rows(height, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < width; ++x) {
        const auto dir = fisheye_try_unproject(intr, Vec2(x, y));
        if (!dir) continue;
        const auto face = select_face(*dir);
        if (!face) continue;  // unreachable below max_five_face_theta
        const Vec2 uv = face_coordinates(*face, *dir, face_size);
        LutEntry& e = entries[static_cast<std::size_t>(y) * width + x];
        e.u = static_cast<float>(std::clamp(uv.x(), 0.0, hi));
        e.v = static_cast<float>(std::clamp(uv.y(), 0.0, hi));
        e.weights = bilinear_weights(e.u, e.v);
        e.face = *face;
        e.valid = true;
      }
    }
  });

  LutHeader header{width, height, face_size,
                   fingerprint ? *fingerprint : intrinsics_fingerprint(intr)};
  return {header, std::move(entries)};
}

std::vector<std::byte> serialize_lut(const LookupTable& lut) {
  std::vector<std::byte> out;
  out.reserve(50 + lut.entries().size() * 10);
  binary::Writer w(out);
  w.put_text("FLUT");
  w.put(kLutFormatVersion);
  w.put(static_cast<std::uint32_t>(lut.width()));
  w.put(static_cast<std::uint32_t>(lut.height()));
  w.put(static_cast<std::uint32_t>(lut.face_size()));
  w.put_bytes(std::as_bytes(std::span(lut.fingerprint())));
  for (const LutEntry& e : lut.entries()) {
    w.put(static_cast<std::uint8_t>(e.face));
    w.put(e.u);
    w.put(e.v);
    w.put(static_cast<std::uint8_t>(e.valid ? 1 : 0));
  }
  return out;
}

LookupTable deserialize_lut(std::span<const std::byte> bytes) {
  binary::Reader r(bytes, "FLUT");
  const auto magic = r.get_bytes(4);
  if (std::memcmp(magic.data(), "FLUT", 4) != 0) throw FormatError("FLUT: bad magic bytes");
  const auto version = r.get<std::uint16_t>();
  if (version != kLutFormatVersion) {
    throw FormatError(fmt::format("FLUT: unsupported version {}", version));
  }
  LutHeader header;
  header.fisheye_width = static_cast<int>(r.get<std::uint32_t>());
  header.fisheye_height = static_cast<int>(r.get<std::uint32_t>());
  header.face_size = static_cast<int>(r.get<std::uint32_t>());
  if (header.fisheye_width <= 0 || header.fisheye_height <= 0 || header.face_size <= 0 ||
      header.fisheye_width > 65536 || header.fisheye_height > 65536) {
    throw FormatError("FLUT: implausible dimensions");
  }
  const auto fp = r.get_bytes(header.fingerprint.size());
  std::memcpy(header.fingerprint.data(), fp.data(), fp.size());

  const std::size_t count = static_cast<std::size_t>(header.fisheye_width) * header.fisheye_height;
  if (r.remaining() != count * 10) {
    throw FormatError(r.remaining() < count * 10 ? "FLUT: truncated stream"
                                                 : "FLUT: trailing bytes after the records");
  }
  const float hi = static_cast<float>(header.face_size - 1);
  std::vector<LutEntry> entries(count);
  for (auto& e : entries) {
    const auto face = r.get<std::uint8_t>();
    e.u = r.get<float>();
    e.v = r.get<float>();
    const auto valid = r.get<std::uint8_t>();
    if (face >= kFaceCount || valid > 1) throw FormatError("FLUT: corrupt pixel record");
    e.face = static_cast<CubeFace>(face);
    e.valid = valid == 1;
    if (e.valid) {
      if (!(e.u >= 0.0f && e.u <= hi && e.v >= 0.0f && e.v <= hi)) {
        throw FormatError("FLUT: source coordinate outside the face");
      }
      e.weights = bilinear_weights(e.u, e.v);
    }
  }
  return {header, std::move(entries)};
}

void save_lut(const std::filesystem::path& path, const LookupTable& lut) {
  write_file(path, serialize_lut(lut));
}

LookupTable load_lut(const std::filesystem::path& path) {
  return deserialize_lut(read_file(path));
}

std::optional<std::string> fingerprint_mismatch(const LookupTable& lut, const Digest& expected) {
  if (lut.fingerprint() == expected) return std::nullopt;
  return fmt::format("lookup table fingerprint {} does not match calibration {}",
                     to_hex(lut.fingerprint()).substr(0, 16), to_hex(expected).substr(0, 16));
}

}  // namespace fisheyegt
