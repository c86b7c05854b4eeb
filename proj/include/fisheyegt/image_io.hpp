#pragma once

#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fisheyegt/raster.hpp"

namespace fisheyegt {

/// An 8-bit or 16-bit PNG as stored on disk. Palette images are returned as
/// their index plane (one channel), which is how label rasters are written.
using PngImage = std::variant<Raster8, Raster16>;

PngImage read_png(const std::filesystem::path& path);
Raster8 read_png8(const std::filesystem::path& path);
Raster16 read_png16(const std::filesystem::path& path);

/// 1, 2, 3 or 4 channels (gray, gray+alpha, RGB, RGBA).
void write_png(const std::filesystem::path& path, const Raster8& image);
/// Single-channel 16-bit gray.
void write_png(const std::filesystem::path& path, const Raster16& image);
/// Single-channel index raster stored as a palette PNG; indices beyond the
/// palette length must not occur.
void write_palette_png(const std::filesystem::path& path, const Raster8& indices,
                       std::span<const Rgb> palette);

/// Float raster container: "FRAS", u32 width, u32 height, u32 channels
/// (16-byte little-endian header) followed by row-major interleaved float32.
std::vector<std::byte> encode_fras(const RasterF& raster);
RasterF decode_fras(std::span<const std::byte> bytes);
void write_fras(const std::filesystem::path& path, const RasterF& raster);
RasterF read_fras(const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never observe
/// a partial file. Throws std::runtime_error on failure.
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace fisheyegt
