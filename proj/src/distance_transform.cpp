#include "semo/distance_transform.hpp"

#include <limits>
#include <vector>

namespace semo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform of sampled function f (stride-addressed, in place).
// Infinite samples carry no parabola and are skipped when building the envelope.
void transform_1d(double* f, std::ptrdiff_t stride, int n, std::vector<int>& v, std::vector<double>& z,
                  std::vector<double>& d) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    const double fq = f[q * stride];
    if (fq == kInf) continue;
    while (k >= 0) {
      const int p = v[std::size_t(k)];
      const double s = ((fq + double(q) * q) - (f[p * stride] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[std::size_t(k)]) {
        --k;
      } else {
        ++k;
        v[std::size_t(k)] = q;
        z[std::size_t(k)] = s;
        z[std::size_t(k) + 1] = kInf;
        break;
      }
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
    }
  }
  if (k < 0) return;  // nothing finite on this line
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[std::size_t(j) + 1] < q) ++j;
    const int p = v[std::size_t(j)];
    d[std::size_t(q)] = double(q - p) * double(q - p) + f[p * stride];
  }
  for (int q = 0; q < n; ++q) f[q * stride] = d[std::size_t(q)];
}

Plane<double> init(const Plane<std::uint8_t>& mask) {
  Plane<double> g(mask.height, mask.width);
  for (std::size_t i = 0; i < mask.size(); ++i) g.data[i] = mask.data[i] ? 0.0 : kInf;
  return g;
}

}  // namespace

Plane<double> squared_distance_transform_serial(const Plane<std::uint8_t>& mask) {
  Plane<double> g = init(mask);
  const int h = g.height, w = g.width;
  const int n = std::max(h, w);
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1), d(static_cast<std::size_t>(n));
  for (int x = 0; x < w; ++x) transform_1d(g.data.data() + x, w, h, v, z, d);
  for (int y = 0; y < h; ++y) transform_1d(g.data.data() + std::size_t(y) * w, 1, w, v, z, d);
  return g;
}

Plane<double> squared_distance_transform(const Plane<std::uint8_t>& mask) {
  Plane<double> g = init(mask);
  const int h = g.height, w = g.width;
  const int n = std::max(h, w);
#pragma omp parallel
  {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1), d(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
    for (int x = 0; x < w; ++x) transform_1d(g.data.data() + x, w, h, v, z, d);
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) transform_1d(g.data.data() + std::size_t(y) * w, 1, w, v, z, d);
  }
  return g;
}

}  // namespace semo
