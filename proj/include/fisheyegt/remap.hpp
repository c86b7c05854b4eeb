#pragma once

#include <limits>
#include <optional>

#include "fisheyegt/cubemap.hpp"
#include "fisheyegt/lut.hpp"
#include "fisheyegt/raster.hpp"

namespace fisheyegt {

enum class Interpolation { bilinear, nearest };

/// Fill values for pixels outside the fisheye coverage.
inline constexpr std::uint8_t kInvalidLabel8 = 255;
inline constexpr float kInvalidFloat = std::numeric_limits<float>::quiet_NaN();

/// Resamples cubemap faces into the fisheye raster described by `lut`.
///
/// Each valid pixel takes the bilinear blend (or the nearest sample) of its
/// source face; taps never cross into a neighbouring face. Pixels outside
/// the coverage get `fill`. Throws DomainError when the face size differs
/// from the LUT, or when bilinear sampling is requested on a label raster.
template <typename T>
Raster<T> remap(const LookupTable& lut, const CubemapFaceSet<T>& faces, Interpolation mode,
                T fill = T{});

/// Ray distance of a face pixel given its plane depth along the face axis:
/// plane_depth / |axis component of the unit direction|.
double ray_distance_from_plane_depth(double plane_depth, const Vec3& unit_dir, CubeFace face);

/// Converts per-face plane depths to Euclidean ray distances and resamples
/// them into the fisheye raster. Each tap is converted with its own ray
/// before blending, so a scene at constant distance stays constant across
/// face seams. Invalid pixels are NaN.
RasterF remap_depth(const LookupTable& lut, const CubemapFaceSet<float>& plane_depths,
                    Interpolation mode = Interpolation::bilinear);

extern template Raster<std::uint8_t> remap(const LookupTable&, const CubemapFaceSet<std::uint8_t>&,
                                           Interpolation, std::uint8_t);
extern template Raster<std::uint16_t> remap(const LookupTable&,
                                            const CubemapFaceSet<std::uint16_t>&, Interpolation,
                                            std::uint16_t);
extern template Raster<std::uint32_t> remap(const LookupTable&,
                                            const CubemapFaceSet<std::uint32_t>&, Interpolation,
                                            std::uint32_t);
extern template Raster<float> remap(const LookupTable&, const CubemapFaceSet<float>&,
                                    Interpolation, float);

}  // namespace fisheyegt
