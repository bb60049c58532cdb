#include <fstream>

#include "doctest.h"
#include "semo/config.hpp"
#include "semo/error.hpp"
#include "support.hpp"

using namespace semo;

TEST_CASE("defaults are the published settings") {
  const PipelineConfig c;
  CHECK(c.frames == 5);
  CHECK(c.max_superpixels == 10);
  CHECK(c.erase_probability == 0.3);
  CHECK(c.eta == 1.0);
  CHECK(c.weight_l1 == 0.25);
  CHECK(c.weight_ssim == 0.75);
  CHECK(c.learning_rate == 2e-4);
  CHECK(c.beta1 == 0.5);
  CHECK(c.beta2 == 0.9);
  CHECK(c.batch_size == 30);
  CHECK(c.epochs == 40);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON overrides and round trip") {
  PipelineConfig c = config_from_json_text(R"({"frames": 3, "loss": "l1", "channels": [8, 16, 32]})");
  CHECK(c.frames == 3);
  CHECK(c.loss == LossKind::L1);
  CHECK(c.channels == std::array<int, 3>{8, 16, 32});
  CHECK(c.height == 240);

  c.erase_probability = 0.6;
  c.seed = 42;
  const PipelineConfig back = config_from_json_text(config_to_json_text(c));
  CHECK(back.erase_probability == 0.6);
  CHECK(back.seed == 42);
  CHECK(back.loss == LossKind::L1);
  CHECK(config_to_json_text(back) == config_to_json_text(c));
}

TEST_CASE("unknown and invalid keys are named") {
  try {
    config_from_json_text(R"({"frams": 3})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "frams");
  }
  try {
    config_from_json_text(R"({"erase_probability": 1.5})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "erase_probability");
  }
  CHECK_THROWS_AS(config_from_json_text(R"({"frames": "five"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text("[1, 2]"), ConfigError);
}

TEST_CASE("config file loading") {
  testing::TempDir dir("cfg");
  std::ofstream(dir / "c.json") << R"({"epochs": 2})";
  CHECK(load_config(dir / "c.json").epochs == 2);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("loss names") {
  for (LossKind k : {LossKind::MOLoss, LossKind::L1, LossKind::SSIM, LossKind::L1PlusSSIM})
    CHECK(loss_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(loss_kind_from_string("l2"), ConfigError);
}
