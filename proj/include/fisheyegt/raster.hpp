#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fisheyegt/errors.hpp"

namespace fisheyegt {

/// What the samples of a raster mean. Label rasters (class ids, instance
/// ids) must never be interpolated.
enum class RasterContent : std::uint8_t { intensity, label };

/// Row-major interleaved raster with `channels` samples per pixel.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels = 1, T fill = T{},
         RasterContent content = RasterContent::intensity)
      : width_(width), height_(height), channels_(channels), content_(content) {
    if (width < 0 || height < 0 || channels <= 0) {
      throw DomainError("raster dimensions must be non-negative with at least one channel");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  static Raster labels(int width, int height, T fill = T{}) {
    return Raster(width, height, 1, fill, RasterContent::label);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }
  RasterContent content() const noexcept { return content_; }
  void set_content(RasterContent c) noexcept { content_ = c; }
  bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }

  T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  T* pixel(int x, int y) noexcept { return data_.data() + index(x, y, 0); }
  const T* pixel(int x, int y) const noexcept { return data_.data() + index(x, y, 0); }

  std::span<T> row(int y) noexcept {
    return {data_.data() + index(0, y, 0), static_cast<std::size_t>(width_) * channels_};
  }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + index(0, y, 0), static_cast<std::size_t>(width_) * channels_};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_ && data_ == other.data_;
  }

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  RasterContent content_ = RasterContent::intensity;
  std::vector<T> data_;
};

using Raster8 = Raster<std::uint8_t>;
using Raster16 = Raster<std::uint16_t>;
using Raster32 = Raster<std::uint32_t>;
using RasterF = Raster<float>;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

}  // namespace fisheyegt
