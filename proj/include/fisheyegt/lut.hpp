#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fisheyegt/camera.hpp"
#include "fisheyegt/cubemap.hpp"
#include "fisheyegt/hash.hpp"

namespace fisheyegt {

/// Default cubemap face side, chosen so that the fisheye center is not
/// undersampled at 1280x966.
inline constexpr int kDefaultFaceSize = 1280;

struct LutHeader {
  int fisheye_width = 0;
  int fisheye_height = 0;
  int face_size = 0;
  Digest fingerprint{};

  bool operator==(const LutHeader&) const = default;
};

/// Source of one fisheye pixel. For valid entries (u, v) is clamped into
/// [0, face_size - 1] and the four bilinear weights (top-left, top-right,
/// bottom-left, bottom-right) follow from the fractional parts.
struct LutEntry {
  float u = 0.0f;
  float v = 0.0f;
  std::array<float, 4> weights{};
  CubeFace face = CubeFace::front;
  bool valid = false;

  bool operator==(const LutEntry&) const = default;
};

/// Per-fisheye-pixel mapping into the cubemap, in row-major order.
class LookupTable {
 public:
  LookupTable(LutHeader header, std::vector<LutEntry> entries);

  const LutHeader& header() const noexcept { return header_; }
  int width() const noexcept { return header_.fisheye_width; }
  int height() const noexcept { return header_.fisheye_height; }
  int face_size() const noexcept { return header_.face_size; }
  const Digest& fingerprint() const noexcept { return header_.fingerprint; }

  const LutEntry& at(int x, int y) const noexcept {
    return entries_[static_cast<std::size_t>(y) * header_.fisheye_width + x];
  }
  std::span<const LutEntry> entries() const noexcept { return entries_; }
  std::size_t valid_count() const noexcept;

  bool operator==(const LookupTable&) const = default;

 private:
  LutHeader header_;
  std::vector<LutEntry> entries_;
};

/// Bilinear weights from clamped source coordinates.
std::array<float, 4> bilinear_weights(float u, float v) noexcept;

/// Fingerprint of the intrinsics alone (used when no extrinsics are known).
Digest intrinsics_fingerprint(const FisheyeIntrinsics& intr);

/// Traces every fisheye pixel: unproject to the unit sphere, pick the cube
/// face pierced by the ray (largest-magnitude component) and project onto
/// that face with its 90-degree pinhole model. Pixels outside the coverage
/// circle are marked invalid. Throws DomainError when face_size <= 0 or when
/// theta_max reaches beyond the five faces.
LookupTable build_lut(const FisheyeIntrinsics& intr, int face_size,
                      std::optional<Digest> fingerprint = std::nullopt);

/// Binary format: "FLUT", u16 version, u32 width, u32 height, u32 face size,
/// 32-byte fingerprint, then per pixel {u8 face, f32 u, f32 v, u8 valid},
/// little-endian. Weights are recomputed on load.
inline constexpr std::uint16_t kLutFormatVersion = 1;

std::vector<std::byte> serialize_lut(const LookupTable& lut);
/// Throws FormatError on bad magic, unknown version or truncation.
LookupTable deserialize_lut(std::span<const std::byte> bytes);

void save_lut(const std::filesystem::path& path, const LookupTable& lut);
LookupTable load_lut(const std::filesystem::path& path);

/// Warning text when the LUT was built for different calibration.
std::optional<std::string> fingerprint_mismatch(const LookupTable& lut, const Digest& expected);

}  // namespace fisheyegt
