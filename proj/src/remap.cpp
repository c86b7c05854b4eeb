#include "fisheyegt/remap.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "fisheyegt/parallel.hpp"

namespace fisheyegt {
namespace {

struct Taps {
  int x0, y0, x1, y1;
};

inline Taps taps_of(const LutEntry& e, int face_size) noexcept {
  const int x0 = static_cast<int>(e.u);  // u >= 0, so truncation is floor
  const int y0 = static_cast<int>(e.v);
  return {x0, y0, std::min(x0 + 1, face_size - 1), std::min(y0 + 1, face_size - 1)};
}

inline int nearest_index(float c, int face_size) noexcept {
  return std::min(static_cast<int>(c + 0.5f), face_size - 1);
}

template <typename T>
T convert_sample(double v) noexcept {
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<T>(v);
  } else {
    constexpr double lo = static_cast<double>(std::numeric_limits<T>::min());
    constexpr double hi = static_cast<double>(std::numeric_limits<T>::max());
    return static_cast<T>(std::clamp(std::round(v), lo, hi));
  }
}

void check_faces(const LookupTable& lut, int face_size) {
  if (face_size != lut.face_size()) {
    throw DomainError(fmt::format("cubemap face size {} does not match the lookup table ({})",
                                  face_size, lut.face_size()));
  }
}

}  // namespace

template <typename T>
Raster<T> remap(const LookupTable& lut, const CubemapFaceSet<T>& faces, Interpolation mode,
                T fill) {
  faces.validate();
  check_faces(lut, faces.face_size);
  const auto content = faces.faces[0].content();
  if (content == RasterContent::label && mode == Interpolation::bilinear) {
    throw DomainError("bilinear interpolation would mix label values; use nearest");
  }
  const int channels = faces.faces[0].channels();
  const int n = faces.face_size;
  Raster<T> out(lut.width(), lut.height(), channels, fill, content);

  parallel_for_rows(lut.height(), [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < lut.width(); ++x) {
        const LutEntry& e = lut.at(x, y);
        if (!e.valid) continue;
        const Raster<T>& src = faces[e.face];
        T* dst = out.pixel(x, y);
        if (mode == Interpolation::nearest) {
          const T* s = src.pixel(nearest_index(e.u, n), nearest_index(e.v, n));
          std::copy(s, s + channels, dst);
          continue;
        }
        const Taps t = taps_of(e, n);
        const T* p00 = src.pixel(t.x0, t.y0);
        const T* p10 = src.pixel(t.x1, t.y0);
        const T* p01 = src.pixel(t.x0, t.y1);
        const T* p11 = src.pixel(t.x1, t.y1);
        const auto& w = e.weights;
        for (int c = 0; c < channels; ++c) {
          const double v = double{w[0]} * p00[c] + double{w[1]} * p10[c] +
                           double{w[2]} * p01[c] + double{w[3]} * p11[c];
          dst[c] = convert_sample<T>(v);
        }
      }
    }
  });
  return out;
}

double ray_distance_from_plane_depth(double plane_depth, const Vec3& unit_dir, CubeFace face) {
  const double axis = std::abs(face_rotation(face).col(2).dot(unit_dir));
  // The selected face always carries the largest component, >= 1/sqrt(3).
  if (!(axis > 0.5)) {
    throw DomainError(fmt::format("direction is not served by face '{}'", face_name(face)));
  }
  return plane_depth / axis;
}

RasterF remap_depth(const LookupTable& lut, const CubemapFaceSet<float>& plane_depths,
                    Interpolation mode) {
  plane_depths.validate();
  check_faces(lut, plane_depths.face_size);
  if (plane_depths.faces[0].channels() != 1) {
    throw DomainError("depth faces must have a single channel");
  }
  const int n = plane_depths.face_size;

  // Ray factor per face pixel; identical for every face by symmetry.
  std::vector<double> factor(static_cast<std::size_t>(n) * n);
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) factor[static_cast<std::size_t>(v) * n + u] = face_ray_factor(Vec2(u, v), n);
  }
  auto ray = [&](const RasterF& face, int u, int v) {
    return double{face.at(u, v)} * factor[static_cast<std::size_t>(v) * n + u];
  };

  RasterF out(lut.width(), lut.height(), 1, kInvalidFloat);
  parallel_for_rows(lut.height(), [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y) {
      for (int x = 0; x < lut.width(); ++x) {
        const LutEntry& e = lut.at(x, y);
        if (!e.valid) continue;
        const RasterF& face = plane_depths[e.face];
        if (mode == Interpolation::nearest) {
          out.at(x, y) = static_cast<float>(ray(face, nearest_index(e.u, n), nearest_index(e.v, n)));
          continue;
        }
        const Taps t = taps_of(e, n);
        const auto& w = e.weights;
        const double d = w[0] * ray(face, t.x0, t.y0) + w[1] * ray(face, t.x1, t.y0) +
                         w[2] * ray(face, t.x0, t.y1) + w[3] * ray(face, t.x1, t.y1);
        out.at(x, y) = static_cast<float>(d);
      }
    }
  });
  return out;
}

template Raster<std::uint8_t> remap(const LookupTable&, const CubemapFaceSet<std::uint8_t>&,
                                    Interpolation, std::uint8_t);
template Raster<std::uint16_t> remap(const LookupTable&, const CubemapFaceSet<std::uint16_t>&,
                                     Interpolation, std::uint16_t);
template Raster<std::uint32_t> remap(const LookupTable&, const CubemapFaceSet<std::uint32_t>&,
                                     Interpolation, std::uint32_t);
template Raster<float> remap(const LookupTable&, const CubemapFaceSet<float>&, Interpolation,
                             float);

}  // namespace fisheyegt
