#pragma once

// SLIC output invariants, shared by the unit tests and the acceptance binary.

#include <set>
#include <string>
#include <vector>

#include "semo/superpixel.hpp"
#include "support.hpp"

namespace testing {

// Random blobs over a blocky colored frame, plus isolated specks.
struct MaskedFrame {
  semo::Frame frame;
  semo::MoMask mask;
};

inline MaskedFrame random_masked_frame(std::uint64_t seed, int h = 48, int w = 64) {
  semo::SplitMix rng(seed);
  MaskedFrame mf{semo::Frame(3, h, w), semo::MoMask(h, w)};
  const int block = 4 + int(rng.below(8));
  std::vector<float> palette;
  for (int i = 0; i < 3 * 64; ++i) palette.push_back(float(rng.uniform()));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t cell = std::size_t((y / block) * 17 + (x / block) * 5) % 64;
      for (int c = 0; c < 3; ++c)
        mf.frame(c, y, x) = std::clamp(palette[cell * 3 + std::size_t(c)] + float(rng.uniform(-0.03, 0.03)), 0.f, 1.f);
    }
  const int blobs = 1 + int(rng.below(4));
  for (int b = 0; b < blobs; ++b) {
    const double cy = rng.uniform(0, h), cx = rng.uniform(0, w);
    const double ry = rng.uniform(3, 16), rx = rng.uniform(3, 20);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dy = (y - cy) / ry, dx = (x - cx) / rx;
        if (dy * dy + dx * dx <= 1.0) mf.mask(y, x) = 255;
      }
  }
  for (int s = 0; s < 6; ++s) mf.mask(int(rng.below(std::uint64_t(h))), int(rng.below(std::uint64_t(w)))) = 255;
  return mf;
}

// Empty string when every invariant holds, otherwise the first violation.
inline std::string superpixel_violation(const semo::Frame& frame, const semo::MoMask& mask,
                                        const semo::SlicParams& params) {
  const semo::SuperpixelMap map = semo::superpixels_for_frame(frame, mask, params);
  if (!(semo::superpixels_for_frame(frame, mask, params) == map)) return "not deterministic";
  const auto regions = semo::connected_components(mask, params.min_region_area);

  std::vector<int> region_of(mask.size(), -1);
  for (const auto& r : regions)
    for (int p : r.pixels) region_of[std::size_t(p)] = r.id;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool labeled = map.labels[i] >= 0;
    if (labeled != (region_of[i] >= 0)) return "partition broken at pixel " + std::to_string(i);
    if (labeled && map.labels[i] >= map.count) return "label out of range";
  }

  std::vector<std::size_t> size(std::size_t(map.count), 0);
  std::vector<int> owner(std::size_t(map.count), -1);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int l = map.labels[i];
    if (l < 0) continue;
    ++size[std::size_t(l)];
    if (owner[std::size_t(l)] < 0) owner[std::size_t(l)] = region_of[i];
    if (owner[std::size_t(l)] != region_of[i]) return "label spans two regions";
  }
  for (std::size_t l = 0; l < size.size(); ++l)
    if (size[l] == 0) return "empty label " + std::to_string(l);

  for (const auto& r : regions) {
    std::set<int> labels;
    for (int p : r.pixels) labels.insert(map.labels[std::size_t(p)]);
    if (int(labels.size()) > params.max_superpixels) return "region exceeds N_sp";
  }

  // Flood fill each label from its first pixel.
  const int w = map.width, h = map.height;
  std::vector<char> seen(mask.size(), 0);
  std::vector<std::size_t> reached(std::size_t(map.count), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int l = map.labels[i];
    if (l < 0 || reached[std::size_t(l)] > 0) continue;
    std::vector<int> stack{int(i)};
    seen[i] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      ++reached[std::size_t(l)];
      const int y = p / w, x = p % w;
      const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& q : nbr) {
        if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
        const int k = q[0] * w + q[1];
        if (seen[std::size_t(k)] || map.labels[std::size_t(k)] != l) continue;
        seen[std::size_t(k)] = 1;
        stack.push_back(k);
      }
    }
    if (reached[std::size_t(l)] != size[std::size_t(l)]) return "label " + std::to_string(l) + " not 4-connected";
  }
  return {};
}

}  // namespace testing
