#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "semo/error.hpp"
#include "semo/synthetic.hpp"
#include "semo/video_io.hpp"
#include "support.hpp"

using namespace semo;

namespace {

// Pixels where two frames differ.
std::size_t changed(const Frame& a, const Frame& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) n += a.data[i] != b.data[i];
  return n;
}

}  // namespace

TEST_CASE("clip counts and shapes") {
  const SyntheticSpec spec;
  const auto ds = synthesize(spec, 0);
  CHECK(ds.train.size() == 8);
  CHECK(ds.test.size() == 8);
  for (const auto& c : ds.train) {
    CHECK(c.frames.size() == 60);
    CHECK(c.frames[0].height == 64);
    CHECK(c.frames[0].width == 64);
    for (auto l : c.labels) CHECK(l == 0);
  }
}

TEST_CASE("abnormal clips are labeled exactly while the fast object is on canvas") {
  const SyntheticSpec spec;
  const auto ds = synthesize(spec, 3);
  int abnormal = 0;
  for (const auto& c : ds.test) {
    int ones = 0;
    for (auto l : c.labels) ones += l;
    if (ones == 0) continue;
    ++abnormal;
    CHECK(ones == 21);
    for (int t = 0; t < 60; ++t) CHECK(c.labels[std::size_t(t)] == (t >= 21 && t < 42));
  }
  CHECK(abnormal == 4);
}

TEST_CASE("the anomaly changes the rendered frames") {
  // Same settings with and without the extra object: frames agree outside the labeled window.
  SyntheticSpec spec;
  spec.train_clips = 0;
  spec.test_normal = 0;
  spec.test_abnormal = 1;
  const auto with = synthesize(spec, 5).test[0];
  spec.abnormal_start = 0.0;
  spec.abnormal_length = 1.0 / 60;
  const auto early = synthesize(spec, 5).test[0];
  // Both clips use the same key, so the normal movers coincide; the abnormal one differs in timing.
  for (int t = 1; t < 21; ++t) CHECK(changed(with.frames[std::size_t(t)], early.frames[std::size_t(t)]) == 0);
  CHECK(changed(with.frames[30], early.frames[30]) > 0);
}

TEST_CASE("deterministic in the seed") {
  SyntheticSpec spec;
  spec.train_clips = 2;
  spec.test_normal = 1;
  spec.test_abnormal = 1;
  const auto a = synthesize(spec, 9), b = synthesize(spec, 9), c = synthesize(spec, 10);
  CHECK(a.train[0].frames[7].data == b.train[0].frames[7].data);
  CHECK(a.test[1].labels == b.test[1].labels);
  CHECK(a.train[0].frames[7].data != c.train[0].frames[7].data);
}

TEST_CASE("invalid specs") {
  SyntheticSpec s;
  s.abnormal_multiplier = 1.0;
  CHECK_THROWS_AS(synthesize(s, 0), ContractError);
  s = {};
  s.abnormal_start = 0.9;
  CHECK_THROWS_AS(synthesize(s, 0), ContractError);
  s = {};
  s.object_size = 40;
  CHECK_THROWS_AS(synthesize(s, 0), ContractError);
}

TEST_CASE("dataset on disk") {
  testing::TempDir dir("synth");
  SyntheticSpec spec;
  spec.clip_length = 6;
  spec.train_clips = 1;
  spec.test_normal = 1;
  spec.test_abnormal = 1;
  spec.abnormal_start = 0.5;
  spec.abnormal_length = 0.5;
  gen_synthetic(spec, 1, dir.path());
  const auto train = load_clips(dir / "train", 64, 64);
  REQUIRE(train.size() == 1);
  CHECK(train[0].size() == 6);
  const auto mem = synthesize(spec, 1);
  for (std::size_t i = 0; i < train[0].frames[2].data.size(); ++i)
    REQUIRE(std::abs(train[0].frames[2].data[i] - mem.train[0].frames[2].data[i]) <= 0.5f / 255);
  const auto labels = load_labels(dir / "test_labels" / "clip_01.txt");
  CHECK(labels.labels == mem.test[1].labels);
  CHECK(std::filesystem::exists(dir / "metadata.json"));
}
