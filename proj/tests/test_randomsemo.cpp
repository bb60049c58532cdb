#include <cmath>
#include <set>

#include "doctest.h"
#include "semo/error.hpp"
#include "semo/randomsemo.hpp"
#include "support.hpp"

using namespace semo;

namespace {

FrameCuboid random_cuboid(int frames, int h, int w, std::uint64_t seed) {
  FrameCuboid c(3, frames, h, w);
  SplitMix rng(seed);
  for (auto& v : c.data) v = float(0.05 + 0.95 * rng.uniform());  // never exactly zero
  return c;
}

// Stripes of width 4 inside a centered box; everything else is background.
SuperpixelMap striped(int h, int w) {
  SuperpixelMap m(h, w);
  for (int y = h / 4; y < 3 * h / 4; ++y)
    for (int x = w / 4; x < 3 * w / 4; ++x) m(y, x) = (x - w / 4) / 4;
  m.count = (w / 2 + 3) / 4;
  return m;
}

}  // namespace

TEST_CASE("probability zero and one") {
  const FrameCuboid c = random_cuboid(3, 16, 24, 1);
  const std::vector<SuperpixelMap> maps(3, striped(16, 24));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto [kept, rk] = randomsemo(c, maps, 0.0, seed);
    CHECK(kept == c);
    for (const auto& f : rk.frames)
      for (const auto& e : f) CHECK(!e.erased);

    const auto [gone, rg] = randomsemo(c, maps, 1.0, seed);
    for (int t = 0; t < 3; ++t)
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x)
          for (int ch = 0; ch < 3; ++ch)
            CHECK(gone.at(ch, t, y, x) == (maps[std::size_t(t)](y, x) >= 0 ? 0.f : c.at(ch, t, y, x)));
  }
}

TEST_CASE("erased pixels are exactly the union of erased superpixels") {
  const FrameCuboid c = random_cuboid(4, 20, 32, 2);
  std::vector<SuperpixelMap> maps;
  for (int t = 0; t < 4; ++t) {
    SuperpixelMap m = striped(20, 32);
    // Shift labels per frame so frames differ.
    for (auto& l : m.labels)
      if (l >= 0) l = (l + t) % m.count;
    maps.push_back(m);
  }
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto [out, rec] = randomsemo(c, maps, 0.4, seed);
    REQUIRE(rec.frames.size() == 4);
    for (int t = 0; t < 4; ++t) {
      std::set<int> erased;
      for (const auto& e : rec.frames[std::size_t(t)])
        if (e.erased) erased.insert(e.label);
      for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 32; ++x) {
          const int l = maps[std::size_t(t)](y, x);
          const bool zero = l >= 0 && erased.count(l);
          for (int ch = 0; ch < 3; ++ch) CHECK(out.at(ch, t, y, x) == (zero ? 0.f : c.at(ch, t, y, x)));
        }
    }
  }
}

TEST_CASE("deterministic in the seed, different across seeds") {
  const FrameCuboid c = random_cuboid(3, 16, 24, 3);
  const std::vector<SuperpixelMap> maps(3, striped(16, 24));
  CHECK(randomsemo(c, maps, 0.5, 11) == randomsemo(c, maps, 0.5, 11));
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) differing += randomsemo(c, maps, 0.5, s).second.frames != randomsemo(c, maps, 0.5, s + 100).second.frames;
  CHECK(differing > 15);
}

TEST_CASE("erasure seeds vary with epoch and sample") {
  CHECK(erasure_seed(1, 0, 5) == erasure_seed(1, 0, 5));
  CHECK(erasure_seed(1, 0, 5) != erasure_seed(1, 1, 5));
  CHECK(erasure_seed(1, 0, 5) != erasure_seed(1, 0, 6));
  CHECK(erasure_seed(1, 0, 5) != erasure_seed(2, 0, 5));
}

TEST_CASE("erasure rate is binomial") {
  const double p = 0.3;
  const int n = 4000;
  int hits = 0;
  for (int s = 0; s < n; ++s) hits += erase_draw(erasure_seed(9, 0, std::uint64_t(s)), 1, 2, p);
  CHECK(std::abs(hits / double(n) - p) <= 3 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("invocation counter and contract errors") {
  const FrameCuboid c = random_cuboid(2, 8, 8, 4);
  const std::vector<SuperpixelMap> maps(2, striped(8, 8));
  const auto before = randomsemo_invocations();
  (void)randomsemo(c, maps, 0.3, 1);
  CHECK(randomsemo_invocations() == before + 1);
  CHECK_THROWS_AS(randomsemo(c, {maps[0]}, 0.3, 1), ContractError);
  CHECK_THROWS_AS(randomsemo(c, maps, 1.5, 1), ContractError);
  CHECK_THROWS_AS(randomsemo(c, std::vector<SuperpixelMap>(2, striped(8, 9)), 0.3, 1), ContractError);
}
