#pragma once

// Independent brute-force references.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "semo/image.hpp"

namespace testing {

// Squared distance to the nearest nonzero pixel by exhaustive search; +inf without foreground.
inline semo::Plane<double> brute_squared_distance(const semo::Plane<std::uint8_t>& mask) {
  semo::Plane<double> out(mask.height, mask.width, std::numeric_limits<double>::infinity());
  std::vector<std::pair<int, int>> fg;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask(y, x)) fg.emplace_back(y, x);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      for (const auto& [fy, fx] : fg)
        out(y, x) = std::min(out(y, x), double((y - fy) * (y - fy) + (x - fx) * (x - fx)));
  return out;
}

// 255 on the foreground, 255 - distance elsewhere, floored at 0.
inline semo::Plane<double> brute_mowm(const semo::Plane<std::uint8_t>& sbm) {
  const auto d2 = brute_squared_distance(sbm);
  semo::Plane<double> out(sbm.height, sbm.width, 0.0);
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = std::isinf(d2.data[i]) ? 0.0 : std::max(0.0, 255.0 - std::sqrt(d2.data[i]));
  return out;
}

// Fraction of (positive, negative) pairs ordered correctly, ties counting one half.
inline double pair_count_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& labels) {
  double good = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      if (s[i] > s[j])
        good += 1;
      else if (s[i] == s[j])
        good += 0.5;
    }
  }
  return good / pairs;
}

}  // namespace testing
