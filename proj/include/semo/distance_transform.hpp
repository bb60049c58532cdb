#pragma once

#include <cstdint>

#include "semo/image.hpp"

namespace semo {

/// Exact squared Euclidean distance from every pixel to the nearest nonzero pixel of `mask`,
/// by two passes of the 1-D lower-envelope transform (columns, then rows).
/// Pixels of an all-zero mask get +infinity.
Plane<double> squared_distance_transform(const Plane<std::uint8_t>& mask);

/// Same algorithm without OpenMP; kept as the reference for the parallel version.
Plane<double> squared_distance_transform_serial(const Plane<std::uint8_t>& mask);

}  // namespace semo
