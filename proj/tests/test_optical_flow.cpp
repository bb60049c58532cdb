#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "semo/error.hpp"
#include "semo/optical_flow.hpp"
#include "support.hpp"

using namespace semo;

namespace {

// Smooth random texture: sum of sinusoids, sampled at a horizontal offset.
Plane<float> texture(int h, int w, double dx, std::uint64_t seed) {
  SplitMix rng(seed);
  double fy[8], fx[8], ph[8];
  for (int k = 0; k < 8; ++k) {
    fy[k] = rng.uniform(0.1, 0.6);
    fx[k] = rng.uniform(0.1, 0.6);
    ph[k] = rng.uniform(0, 6.28);
  }
  Plane<float> p(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.5;
      for (int k = 0; k < 8; ++k) v += 0.05 * std::sin(fy[k] * y + fx[k] * (x - dx) + ph[k]);
      p(y, x) = float(v);
    }
  return p;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(v.size() / 2), v.end());
  return v[v.size() / 2];
}

MoMask brute_morph(const MoMask& m, bool erode) {
  MoMask out(m.height, m.width);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      bool acc = erode;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= m.height || xx >= m.width) continue;
          acc = erode ? (acc && m(yy, xx)) : (acc || m(yy, xx));
        }
      out(y, x) = acc ? 255 : 0;
    }
  return out;
}

}  // namespace

TEST_CASE("identical frames give near-zero flow") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Plane<float> a = texture(48, 64, 0, seed);
    const Plane<float> mag = flow_magnitude(estimate_flow(a, a));
    CHECK(*std::max_element(mag.data.begin(), mag.data.end()) < 0.1f);
  }
}

TEST_CASE("a known shift is recovered") {
  const Plane<float> prev = texture(64, 80, 0, 4);
  const Plane<float> next = texture(64, 80, 3, 4);
  const FlowField f = estimate_flow(prev, next);
  std::vector<double> us, vs;
  for (int y = 10; y < 54; ++y)
    for (int x = 10; x < 70; ++x) {
      us.push_back(f.u(y, x));
      vs.push_back(f.v(y, x));
    }
  const double mu = median(us), mv = median(vs);
  CHECK(mu >= 2.5);
  CHECK(mu <= 3.5);
  CHECK(std::abs(mv) <= 0.5);
}

TEST_CASE("flat frames still give finite flow") {
  const Plane<float> a(32, 32, 0.4f), b(32, 32, 0.6f);
  const FlowField f = estimate_flow(a, b);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    CHECK(std::isfinite(f.u.data[i]));
    CHECK(std::isfinite(f.v.data[i]));
  }
}

TEST_CASE("frame size mismatch is a contract error") {
  CHECK_THROWS_AS(estimate_flow(Plane<float>(16, 16), Plane<float>(16, 17)), ContractError);
}

TEST_CASE("magnitude") {
  FlowField f(2, 2);
  f.u(0, 1) = 3;
  f.v(0, 1) = 4;
  CHECK(flow_magnitude(f)(0, 1) == 5.f);
  CHECK(flow_magnitude(f)(1, 1) == 0.f);
  FlowField neg = f;
  for (auto& v : neg.u.data) v = -v;
  for (auto& v : neg.v.data) v = -v;
  CHECK(flow_magnitude(neg) == flow_magnitude(f));
}

TEST_CASE(".flo round trip and errors") {
  testing::TempDir dir("flo");
  FlowField f(3, 5);
  SplitMix rng(1);
  for (auto& v : f.u.data) v = float(rng.uniform(-4, 4));
  for (auto& v : f.v.data) v = float(rng.uniform(-4, 4));
  write_flow(dir / "a.flo", f);
  CHECK(load_flow(dir / "a.flo") == f);

  write_flow(dir / "z.flo", FlowField(2, 2));
  CHECK(load_flow(dir / "z.flo") == FlowField(2, 2));

  {
    std::ofstream out(dir / "bad.flo", std::ios::binary);
    const float magic = 0.f;
    const std::int32_t dims[2] = {2, 2};
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(dims), 8);
    out.write(std::string(32, '\0').data(), 32);
  }
  CHECK_THROWS_AS(load_flow(dir / "bad.flo"), FormatError);

  std::filesystem::resize_file(dir / "a.flo", 12 + 10);
  CHECK_THROWS_AS(load_flow(dir / "a.flo"), LengthError);
}

TEST_CASE("solid block survives the cleanup exactly") {
  Plane<float> mag(30, 30);
  for (int y = 8; y < 18; ++y)
    for (int x = 11; x < 21; ++x) mag(y, x) = 5.f;
  const MoMask raw = binarize(mag, 1.0);
  const MoMask expected = brute_morph(brute_morph(brute_morph(brute_morph(raw, true), false), false), true);
  const MoMask mask = threshold_mask(mag, 1.0);
  CHECK(mask == raw);
  CHECK(mask == expected);
}

TEST_CASE("morphology matches the brute-force definition on random masks") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MoMask m = testing::random_mask(17, 23, 0.4, seed);
    CHECK(erode3x3(m) == brute_morph(m, true));
    CHECK(dilate3x3(m) == brute_morph(m, false));
    const MoMask oc = open_close3x3(m);
    for (auto v : oc.data) CHECK((v == 0 || v == 255));
  }
}

TEST_CASE("threshold edge cases and monotonicity") {
  CHECK(threshold_mask(Plane<float>(8, 8), 1.0) == MoMask(8, 8));
  CHECK(threshold_mask(Plane<float>(8, 8, 0.01f), 0.0) == MoMask(8, 8, 255));
  SplitMix rng(3);
  Plane<float> mag(20, 20);
  for (auto& v : mag.data) v = float(rng.uniform(0, 3));
  const MoMask lo = binarize(mag, 1.0), hi = binarize(mag, 2.0);
  for (std::size_t i = 0; i < lo.size(); ++i) CHECK((hi.data[i] == 0 || lo.data[i] == 255));
}
