#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "semo/error.hpp"
#include "semo/scoring.hpp"
#include "support.hpp"

using namespace semo;

TEST_CASE("psnr values") {
  Frame target(1, 2, 2, 0.f);
  Frame pred(1, 2, 2, 0.f);
  pred.data = {1.f, 0.f, 0.f, 0.f};
  // max 1, MSE 0.25
  CHECK(psnr(pred, target) == doctest::Approx(10 * std::log10(4.0)));
  Frame p2(1, 1, 1, 1.f), t2(1, 1, 1, 0.9f);
  CHECK(psnr(p2, t2) == doctest::Approx(20.0));

  Frame big(1, 1, 1, 100.f), zero(1, 1, 1, 0.f);
  // max² / MSE = 1 → 0 dB; strict uses max / MSE = 0.01 → -20 dB
  CHECK(psnr(big, zero) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(psnr(big, zero, true) == doctest::Approx(-20.0).epsilon(1e-6));

  CHECK(psnr(t2, t2) == kPsnrCap);
  CHECK_THROWS_AS(psnr(Frame(1, 2, 2), Frame(1, 2, 3)), ContractError);
}

TEST_CASE("normalization endpoints") {
  const auto s = normalize_scores({30.0, 20.0, 25.0, 40.0});
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == 0.0);
  CHECK(s[3] == 1.0);
  const auto c = normalize_scores({7.0, 7.0});
  CHECK(c == std::vector<double>{0.5, 0.5});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix rng(seed);
    std::vector<double> v(2 + rng.below(50));
    for (auto& x : v) x = rng.uniform(-50, 120);
    const auto n = normalize_scores(v);
    CHECK(*std::min_element(n.begin(), n.end()) == 0.0);
    CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
  }
}

TEST_CASE("auc examples") {
  CHECK(rank_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  CHECK(rank_auc({0.1, 0.9, 0.8, 0.2}, {0, 0, 1, 1}) == 0.5);
  CHECK(rank_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
  CHECK(rank_auc({0.5, 0.5, 0.5}, {0, 1, 0}) == 0.5);
  CHECK_THROWS_AS(rank_auc({0.1, 0.2}, {1, 1}), EvalMismatchError);
  CHECK_THROWS_AS(rank_auc({0.1, 0.2}, {1}), EvalMismatchError);
}

TEST_CASE("rank auc equals the pair count") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SplitMix rng(seed);
    const std::size_t n = 2 + rng.below(300);
    std::vector<double> s(n);
    std::vector<std::uint8_t> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(rng.below(20)) / 4;  // many ties
      l[i] = rng.uniform() < 0.3;
    }
    l[0] = 1;
    l[1] = 0;
    CHECK(std::abs(rank_auc(s, l) - testing::pair_count_auc(s, l)) <= 1e-12);
    CHECK(std::abs(roc_curve(s, l).auc - rank_auc(s, l)) <= 1e-12);
    // Strictly increasing transforms leave the AUC unchanged.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3 * s[i]) - 7;
    CHECK(rank_auc(t, l) == rank_auc(s, l));
  }
}

TEST_CASE("roc curve shape") {
  const auto r = roc_curve({0.9, 0.8, 0.7, 0.1}, {1, 0, 1, 0});
  CHECK(r.positives == 2);
  CHECK(r.negatives == 2);
  REQUIRE(!r.points.empty());
  CHECK(r.points.back().fpr == 1.0);
  CHECK(r.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    CHECK(r.points[i].threshold < r.points[i - 1].threshold);
    CHECK(r.points[i].fpr >= r.points[i - 1].fpr);
    CHECK(r.points[i].tpr >= r.points[i - 1].tpr);
  }
  CHECK(r.auc == doctest::Approx(0.75));
}

TEST_CASE("series and frame-level evaluation") {
  const ScoreSeries a = make_series("a", 2, 6, {30, 20, 25, 40});
  CHECK(a.frame_index == std::vector<int>{2, 3, 4, 5});
  CHECK(a.anomaly(1) == 1.0);
  const ScoreSeries b = make_series("b", 2, 5, {10, 30, 20});

  ClipLabels la{"a", {0, 0, 0, 1, 0, 0}};
  ClipLabels lb{"b", {1, 1, 0, 0, 1}};
  const RocResult r = frame_auc({a, b}, {lb, la}, 2);
  CHECK(r.positives == 2);
  CHECK(r.negatives == 5);
  // anomalies: a = {0.5, 1, 0.75, 0} labels {0,1,0,0}; b = {1, 0, 0.5} labels {0,0,1}
  std::vector<double> s{0.5, 1, 0.75, 0, 1, 0, 0.5};
  std::vector<std::uint8_t> l{0, 1, 0, 0, 0, 0, 1};
  CHECK(r.auc == doctest::Approx(testing::pair_count_auc(s, l)));

  CHECK_THROWS_AS(frame_auc({a}, {ClipLabels{"a", {0, 0, 0, 1, 0}}}, 2), EvalMismatchError);
  CHECK_THROWS_AS(frame_auc({a}, {lb}, 2), EvalMismatchError);
}

TEST_CASE("scores csv round trip") {
  std::vector<ScoreSeries> in{make_series("clip_a", 3, 7, {31.25, 29.0, 1.0 / 3, 40.0}),
                              make_series("clip_b", 3, 5, {10.0, 12.5})};
  std::stringstream ss;
  write_scores_csv(ss, in);
  CHECK(ss.str().rfind("clip_id,frame_index,psnr_db,normality,anomaly\n", 0) == 0);
  const auto out = read_scores_csv(ss);
  REQUIRE(out.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(out[k].clip_id == in[k].clip_id);
    CHECK(out[k].frame_index == in[k].frame_index);
    CHECK(out[k].psnr == in[k].psnr);
    CHECK(out[k].normality == in[k].normality);
    CHECK(out[k].skip_prefix == 3);
  }
  std::stringstream bad("clip_id,frame_index,psnr_db,normality,anomaly\nx,notanumber,1,1,0\n");
  CHECK_THROWS_AS(read_scores_csv(bad), ParseError);
}

TEST_CASE("roc csv") {
  std::stringstream ss;
  write_roc_csv(ss, roc_curve({0.2, 0.8}, {0, 1}));
  const std::string s = ss.str();
  CHECK(s.rfind("threshold,fpr,tpr\n", 0) == 0);
  CHECK(s.find("# auc=1") != std::string::npos);
}

TEST_CASE("difference map") {
  Frame a(3, 2, 2, 0.f), b(3, 2, 2, 0.f);
  b(0, 1, 1) = 1.f;
  const auto d = difference_map(a, b);
  CHECK(d.channels == 3);
  CHECK(d(0, 1, 1) > d(0, 0, 0));
  CHECK_THROWS_AS(difference_map(a, Frame(3, 2, 3)), ContractError);
}
