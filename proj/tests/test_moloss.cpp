#include <cmath>

#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "semo/error.hpp"
#include "semo/moloss.hpp"
#include "support.hpp"

using namespace semo;

TEST_CASE("summed mask clamps at 255") {
  std::vector<MoMask> masks(3, MoMask(2, 2));
  masks[0](0, 0) = masks[1](0, 0) = masks[2](0, 0) = 255;
  masks[1](1, 1) = 255;
  const SBM s = compute_sbm(masks);
  CHECK(s(0, 0) == 255);
  CHECK(s(1, 1) == 255);
  CHECK(s(0, 1) == 0);

  std::vector<MoMask> small(3, MoMask(1, 2));
  small[0](0, 0) = 100;
  small[1](0, 0) = 100;
  small[2](0, 0) = 100;
  small[0](0, 1) = 1;
  small[1](0, 1) = 2;
  const SBM t = compute_sbm(small);
  CHECK(t(0, 0) == 255);
  CHECK(t(0, 1) == 3);

  CHECK_THROWS_AS(compute_sbm({}), ContractError);
  CHECK_THROWS_AS(compute_sbm({MoMask(2, 2), MoMask(2, 3)}), ContractError);
}

TEST_CASE("weight map matches exhaustive distance search") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SplitMix rng(seed);
    const int h = 2 + int(rng.below(48)), w = 2 + int(rng.below(48));
    auto sbm = testing::random_mask(h, w, rng.uniform(0.002, 0.2), seed);
    sbm(0, 0) = 1;
    const auto ref = testing::brute_mowm(sbm);
    const auto got = compute_mowm(sbm);
    for (std::size_t i = 0; i < ref.data.size(); ++i) REQUIRE(std::abs(got.data[i] - ref.data[i]) <= 1e-9);
  }
}

TEST_CASE("weight map values on a known layout") {
  SBM sbm(1, 300);
  sbm(0, 0) = 255;
  const MOWM m = compute_mowm(sbm);
  CHECK(m(0, 0) == 255.0);
  CHECK(m(0, 10) == 245.0);
  CHECK(m(0, 255) == 0.0);
  CHECK(m(0, 299) == 0.0);

  SBM square(512, 512);
  square(0, 0) = 1;
  const MOWM far = compute_mowm(square);
  CHECK(far(300, 0) == 0.0);
  CHECK(far(3, 4) == doctest::Approx(250.0));

  const MOWM none = compute_mowm(SBM(4, 4));
  for (double v : none.data) CHECK(v == 0.0);
  CHECK(mowm_to_gray(m)(0, 10) == 245);
}

TEST_CASE("weighted L1 value") {
  Image<double> pred(2, 1, 2), target(2, 1, 2);
  pred.data = {0.5, 0.0, 0.2, 1.0};  // channel 0: px0 0.5 px1 0.0; channel 1: px0 0.2 px1 1.0
  target.data = {0.0, 0.0, 0.0, 0.5};
  MOWM w(1, 2);
  w.data = {255.0, 0.0};
  // px0: (255+1)(0.5+0.2); px1: (0+1)(0+0.5); mean over 2 pixels.
  const auto v = weighted_l1(pred, target, w, 1.0);
  CHECK(v.value == doctest::Approx((256 * 0.7 + 0.5) / 2));
  CHECK(v.grad.data[0] == doctest::Approx(128.0));
  CHECK(v.grad.data[1] == 0.0);
  CHECK(v.grad.data[3] == doctest::Approx(0.5));
  CHECK(plain_l1(pred, target).value == doctest::Approx(1.2 / 2));
}

TEST_CASE("SSIM loss of identical frames is zero") {
  const auto f = testing::random_frame(3, 8, 8, 5);
  Image<double> x(3, 8, 8);
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = f.data[i];
  const auto v = ssim_loss(x, x, 1e-4, 9e-4);
  CHECK(std::abs(v.value) < 1e-12);
  for (double g : v.grad.data) CHECK(std::abs(g) < 1e-9);
}

TEST_CASE("SSIM gradient against finite differences") {
  for (bool variant : {false, true}) {
    Image<double> x(2, 5, 6), y(2, 5, 6);
    SplitMix rng(variant ? 3 : 4);
    for (auto& v : x.data) v = rng.uniform();
    for (auto& v : y.data) v = rng.uniform();
    const auto a = ssim_loss(x, y, 1e-4, 9e-4, variant);
    const double h = 1e-6;
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      Image<double> xp = x, xm = x;
      xp.data[i] += h;
      xm.data[i] -= h;
      const double n = (ssim_loss(xp, y, 1e-4, 9e-4, variant).value - ssim_loss(xm, y, 1e-4, 9e-4, variant).value) / (2 * h);
      worst = std::max(worst, testing::rel_err(a.grad.data[i], n));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("combined loss gradient against finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = testing::gradcheck_loss(seed);
    INFO("seed " << seed << " worst " << r.worst);
    CHECK(r.checked > 0);
    CHECK(r.max_rel < 1e-3);
  }
}

TEST_CASE("loss kinds select their terms") {
  Image<double> x(3, 6, 6), y(3, 6, 6);
  SplitMix rng(8);
  for (auto& v : x.data) v = rng.uniform();
  for (auto& v : y.data) v = rng.uniform();
  MOWM w(6, 6, 10.0);
  LossConfig cfg;
  const double wl1 = weighted_l1(x, y, w, 1.0).value;
  const double pl1 = plain_l1(x, y).value;
  const double ss = ssim_loss(x, y, cfg.c1, cfg.c2).value;

  cfg.kind = LossKind::MOLoss;
  CHECK(moloss(x, y, w, cfg).first.total == doctest::Approx(0.25 * wl1 + 0.75 * ss));
  cfg.kind = LossKind::L1;
  CHECK(moloss(x, y, w, cfg).first.total == doctest::Approx(pl1));
  cfg.kind = LossKind::SSIM;
  CHECK(moloss(x, y, w, cfg).first.total == doctest::Approx(ss));
  cfg.kind = LossKind::L1PlusSSIM;
  CHECK(moloss(x, y, w, cfg).first.total == doctest::Approx(0.25 * pl1 + 0.75 * ss));
  CHECK_THROWS_AS(moloss(x, Image<double>(3, 6, 5), w, cfg), ContractError);
}
