#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "semo/checkpoint.hpp"
#include "semo/error.hpp"
#include "support.hpp"

using namespace semo;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny() {
  ModelConfig m;
  m.frames = 3;
  m.height = 16;
  m.width = 16;
  m.channels = {2, 3, 4};
  return m;
}

Checkpoint sample() {
  Checkpoint c;
  c.model = tiny();
  c.params = init_params<float>(c.model, 5);
  c.params.enc2.norm.running_var[1] = 2.5f;
  AdamState<float> a = AdamState<float>::zeros(c.params);
  a.m.head.weight[0] = 0.125f;
  a.v.dec1.norm.beta[0] = 3.0f;
  a.step = 17;
  c.adam = a;
  c.step = 17;
  c.epoch = 4;
  return c;
}

std::vector<char> bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put(const fs::path& p, const std::vector<char>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(b.data(), std::streamsize(b.size()));
}

}  // namespace

TEST_CASE("round trip") {
  testing::TempDir dir("ckpt_rt");
  const Checkpoint c = sample();
  save_checkpoint(dir / "a.bin", c);
  const Checkpoint r = load_checkpoint(dir / "a.bin");
  CHECK(r.model == c.model);
  CHECK(r.params == c.params);
  REQUIRE(r.adam.has_value());
  CHECK(*r.adam == *c.adam);
  CHECK(r.step == 17);
  CHECK(r.epoch == 4);

  // Saving what was loaded reproduces the file byte for byte.
  save_checkpoint(dir / "b.bin", r);
  CHECK(bytes(dir / "a.bin") == bytes(dir / "b.bin"));

  Checkpoint bare = c;
  bare.adam.reset();
  save_checkpoint(dir / "c.bin", bare);
  CHECK(!load_checkpoint(dir / "c.bin").adam.has_value());
}

TEST_CASE("corrupt files are rejected") {
  testing::TempDir dir("ckpt_bad");
  save_checkpoint(dir / "a.bin", sample());
  auto b = bytes(dir / "a.bin");

  auto magic = b;
  magic[0] = 'X';
  put(dir / "magic.bin", magic);
  CHECK_THROWS_AS(load_checkpoint(dir / "magic.bin"), FormatError);

  put(dir / "short.bin", std::vector<char>(b.begin(), b.begin() + std::ptrdiff_t(b.size() / 2)));
  CHECK_THROWS_AS(load_checkpoint(dir / "short.bin"), LengthError);

  auto longer = b;
  longer.push_back(0);
  put(dir / "long.bin", longer);
  CHECK_THROWS_AS(load_checkpoint(dir / "long.bin"), FormatError);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin"), IoError);
}

TEST_CASE("model mismatch") {
  const Checkpoint c = sample();
  CHECK_NOTHROW(require_model(c, tiny()));
  ModelConfig other = tiny();
  other.channels = {4, 3, 2};
  CHECK_THROWS_AS(require_model(c, other), ModelMismatchError);
  other = tiny();
  other.frames = 5;
  CHECK_THROWS_AS(require_model(c, other), ModelMismatchError);
}
