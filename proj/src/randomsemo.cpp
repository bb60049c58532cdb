#include "semo/randomsemo.hpp"

#include <atomic>

#include "semo/error.hpp"
#include "semo/rng.hpp"

namespace semo {
namespace {
std::atomic<std::uint64_t> g_invocations{0};
}

bool erase_draw(std::uint64_t seed, int frame_index, int label, double probability) {
  return to_unit(hash_key(seed, std::uint64_t(frame_index), std::uint64_t(label), 0x5e3a0ULL)) < probability;
}

std::pair<FrameCuboid, ErasureRecord> randomsemo(const FrameCuboid& cuboid, const std::vector<SuperpixelMap>& maps,
                                                 double probability, std::uint64_t seed) {
  ++g_invocations;
  if (int(maps.size()) != cuboid.frames)
    throw ContractError("randomsemo: expected one superpixel map per cuboid frame");
  if (!(probability >= 0.0 && probability <= 1.0)) throw ContractError("randomsemo: probability outside [0,1]");
  for (const auto& m : maps)
    if (m.height != cuboid.height || m.width != cuboid.width)
      throw ContractError("randomsemo: superpixel map does not match cuboid size");

  FrameCuboid out = cuboid;
  ErasureRecord record;
  record.seed = seed;
  record.frames.resize(maps.size());
  const std::size_t plane = cuboid.plane_size();
  for (int t = 0; t < cuboid.frames; ++t) {
    const SuperpixelMap& map = maps[std::size_t(t)];
    std::vector<char> erased(std::size_t(map.count), 0);
    auto& entries = record.frames[std::size_t(t)];
    entries.reserve(std::size_t(map.count));
    for (int label = 0; label < map.count; ++label) {
      const bool e = erase_draw(seed, t, label, probability);
      erased[std::size_t(label)] = e;
      entries.push_back({label, e});
    }
    for (std::size_t i = 0; i < plane; ++i) {
      const int label = map.labels[i];
      if (label < 0 || !erased[std::size_t(label)]) continue;
      for (int c = 0; c < cuboid.channels; ++c) out.data[(std::size_t(c) * cuboid.frames + t) * plane + i] = 0.f;
    }
  }
  return {std::move(out), std::move(record)};
}

std::uint64_t erasure_seed(std::uint64_t base_seed, int epoch, std::uint64_t sample_key) {
  return hash_key(base_seed, std::uint64_t(epoch), sample_key, 0xe20c4ULL);
}

std::uint64_t randomsemo_invocations() { return g_invocations.load(); }

}  // namespace semo
