#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "semo/superpixel.hpp"
#include "semo/video_io.hpp"

namespace semo {

struct ErasureEntry {
  int label = 0;
  bool erased = false;
  bool operator==(const ErasureEntry&) const = default;
};

/// Which superpixels of each input frame were zeroed, and under which seed.
struct ErasureRecord {
  std::uint64_t seed = 0;
  std::vector<std::vector<ErasureEntry>> frames;
  bool operator==(const ErasureRecord&) const = default;
};

/// Erasure decision for one superpixel; depends only on (seed, frame, label).
bool erase_draw(std::uint64_t seed, int frame_index, int label, double probability);

/// Zeroes every channel of each superpixel independently with `probability`.
/// One map per cuboid frame; background (-1) pixels are never touched.
std::pair<FrameCuboid, ErasureRecord> randomsemo(const FrameCuboid& cuboid, const std::vector<SuperpixelMap>& maps,
                                                 double probability, std::uint64_t seed);

/// Per-sample seed that changes every epoch.
std::uint64_t erasure_seed(std::uint64_t base_seed, int epoch, std::uint64_t sample_key);

/// Number of randomsemo() calls in this process; lets tests prove a path never erases.
std::uint64_t randomsemo_invocations();

}  // namespace semo
