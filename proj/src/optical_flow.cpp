#include "semo/optical_flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "semo/error.hpp"

namespace semo {
namespace {

using Grid = Plane<double>;

// Local quadratic model f(x0 + d) ≈ c + b·d + dᵀ A d, stored per pixel.
struct Expansion {
  Grid a11, a12, a22;  // A = [[a11, a12], [a12, a22]]
  Grid b1, b2;
};

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Solves the 6×6 symmetric system by Gauss-Jordan; the matrix is tiny and well conditioned.
std::array<std::array<double, 6>, 6> invert6(std::array<std::array<double, 6>, 6> m) {
  std::array<std::array<double, 6>, 6> inv{};
  for (int i = 0; i < 6; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 6; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 6; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = m[col][col];
    for (int k = 0; k < 6; ++k) {
      m[col][k] /= p;
      inv[col][k] /= p;
    }
    for (int r = 0; r < 6; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      if (f == 0.0) continue;
      for (int k = 0; k < 6; ++k) {
        m[r][k] -= f * m[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

// Weighted least-squares fit of {1, x, y, x², y², xy} under a separable Gaussian applicability.
Expansion polynomial_expansion(const Grid& img, int poly_n, double sigma) {
  const int r = poly_n / 2;
  std::vector<double> g(2 * r + 1);
  double gsum = 0.0;
  for (int i = -r; i <= r; ++i) {
    g[i + r] = std::exp(-double(i * i) / (2.0 * sigma * sigma));
    gsum += g[i + r];
  }
  for (double& w : g) w /= gsum;

  // Gram matrix of the basis under the applicability.
  std::array<std::array<double, 6>, 6> gram{};
  for (int j = -r; j <= r; ++j) {
    for (int i = -r; i <= r; ++i) {
      const double w = g[i + r] * g[j + r];
      const double x = i, y = j;
      const std::array<double, 6> phi = {1.0, x, y, x * x, y * y, x * y};
      for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) gram[p][q] += w * phi[p] * phi[q];
    }
  }
  const auto ginv = invert6(gram);

  const int h = img.height, w = img.width;
  Grid r0(h, w), r1(h, w), r2(h, w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s0 = 0, s1 = 0, s2 = 0;
      for (int i = -r; i <= r; ++i) {
        const double v = img(y, clampi(x + i, 0, w - 1)) * g[i + r];
        s0 += v;
        s1 += v * i;
        s2 += v * i * i;
      }
      r0(y, x) = s0;
      r1(y, x) = s1;
      r2(y, x) = s2;
    }
  }

  Expansion e{Grid(h, w), Grid(h, w), Grid(h, w), Grid(h, w), Grid(h, w)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 6> s{};  // moments for 1, x, y, xx, yy, xy
      for (int j = -r; j <= r; ++j) {
        const int yy = clampi(y + j, 0, h - 1);
        const double gj = g[j + r];
        s[0] += gj * r0(yy, x);
        s[1] += gj * r1(yy, x);
        s[2] += gj * j * r0(yy, x);
        s[3] += gj * r2(yy, x);
        s[4] += gj * j * j * r0(yy, x);
        s[5] += gj * j * r1(yy, x);
      }
      std::array<double, 6> c{};
      for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) c[p] += ginv[p][q] * s[q];
      e.b1(y, x) = c[1];
      e.b2(y, x) = c[2];
      e.a11(y, x) = c[3];
      e.a22(y, x) = c[4];
      e.a12(y, x) = 0.5 * c[5];
    }
  }
  return e;
}

Grid box_filter(const Grid& src, int radius) {
  const int h = src.height, w = src.width;
  Grid tmp(h, w), out(h, w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -radius; i <= radius; ++i) s += src(y, clampi(x + i, 0, w - 1));
      tmp(y, x) = s;
    }
  }
  const double norm = 1.0 / double((2 * radius + 1) * (2 * radius + 1));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int j = -radius; j <= radius; ++j) s += tmp(clampi(y + j, 0, h - 1), x);
      out(y, x) = s * norm;
    }
  }
  return out;
}

double sample_bilinear(const Grid& g, double y, double x) {
  y = std::clamp(y, 0.0, double(g.height - 1));
  x = std::clamp(x, 0.0, double(g.width - 1));
  const int y0 = int(y), x0 = int(x);
  const int y1 = std::min(y0 + 1, g.height - 1), x1 = std::min(x0 + 1, g.width - 1);
  const double ay = y - y0, ax = x - x0;
  const double top = g(y0, x0) + (g(y0, x1) - g(y0, x0)) * ax;
  const double bot = g(y1, x0) + (g(y1, x1) - g(y1, x0)) * ax;
  return top + (bot - top) * ay;
}

// 5-tap binomial blur followed by 2× decimation.
Grid pyr_down(const Grid& src) {
  static constexpr double k[5] = {1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  const int h = src.height, w = src.width;
  Grid tmp(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * src(y, clampi(x + i, 0, w - 1));
      tmp(y, x) = s;
    }
  const int oh = (h + 1) / 2, ow = (w + 1) / 2;
  Grid out(oh, ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int j = -2; j <= 2; ++j) s += k[j + 2] * tmp(clampi(2 * y + j, 0, h - 1), 2 * x);
      out(y, x) = s;
    }
  return out;
}

Grid resize_grid(const Grid& src, int h, int w) {
  if (src.height == h && src.width == w) return src;
  Grid out(h, w);
  const double sy = double(src.height) / h, sx = double(src.width) / w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(y, x) = sample_bilinear(src, (y + 0.5) * sy - 0.5, (x + 0.5) * sx - 0.5);
  return out;
}

void refine_level(const Expansion& e1, const Expansion& e2, Grid& du, Grid& dv, const FlowParams& p) {
  const int h = du.height, w = du.width;
  Grid m11(h, w), m12(h, w), m22(h, w), h1(h, w), h2(h, w);
  const int radius = p.window / 2;
  for (int iter = 0; iter < p.iterations; ++iter) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double u = du(y, x), v = dv(y, x);
        const double sy = y + v, sx = x + u;
        const double a11 = 0.5 * (e1.a11(y, x) + sample_bilinear(e2.a11, sy, sx));
        const double a12 = 0.5 * (e1.a12(y, x) + sample_bilinear(e2.a12, sy, sx));
        const double a22 = 0.5 * (e1.a22(y, x) + sample_bilinear(e2.a22, sy, sx));
        const double db1 = -0.5 * (sample_bilinear(e2.b1, sy, sx) - e1.b1(y, x)) + a11 * u + a12 * v;
        const double db2 = -0.5 * (sample_bilinear(e2.b2, sy, sx) - e1.b2(y, x)) + a12 * u + a22 * v;
        // AᵀA and AᵀΔb with symmetric A
        m11(y, x) = a11 * a11 + a12 * a12;
        m12(y, x) = a12 * (a11 + a22);
        m22(y, x) = a12 * a12 + a22 * a22;
        h1(y, x) = a11 * db1 + a12 * db2;
        h2(y, x) = a12 * db1 + a22 * db2;
      }
    }
    const Grid s11 = box_filter(m11, radius), s12 = box_filter(m12, radius), s22 = box_filter(m22, radius);
    const Grid t1 = box_filter(h1, radius), t2 = box_filter(h2, radius);
    constexpr double ridge = 1e-9;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g11 = s11(y, x) + ridge, g22 = s22(y, x) + ridge, g12 = s12(y, x);
        const double det = g11 * g22 - g12 * g12;
        du(y, x) = (g22 * t1(y, x) - g12 * t2(y, x)) / det;
        dv(y, x) = (g11 * t2(y, x) - g12 * t1(y, x)) / det;
      }
    }
  }
}

}  // namespace

FlowField estimate_flow(const Plane<float>& prev, const Plane<float>& next, const FlowParams& p) {
  if (!prev.same_shape(next)) throw ContractError("estimate_flow: frame sizes differ");
  if (prev.empty()) throw ContractError("estimate_flow: empty frame");
  if (p.levels < 1 || p.iterations < 1 || p.window < 1 || p.poly_n < 3)
    throw ContractError("estimate_flow: invalid parameters");

  std::vector<Grid> pyr1{Grid(prev.height, prev.width)}, pyr2{Grid(prev.height, prev.width)};
  std::copy(prev.data.begin(), prev.data.end(), pyr1[0].data.begin());
  std::copy(next.data.begin(), next.data.end(), pyr2[0].data.begin());
  for (int l = 1; l < p.levels; ++l) {
    const Grid& top = pyr1.back();
    if (std::min(top.height, top.width) < 2 * p.poly_n) break;
    Grid d1 = pyr_down(top);
    Grid d2 = pyr_down(pyr2.back());
    if (p.pyramid_scale != 0.5) {
      const int h = std::max(1, int(std::lround(pyr1[0].height * std::pow(p.pyramid_scale, l))));
      const int w = std::max(1, int(std::lround(pyr1[0].width * std::pow(p.pyramid_scale, l))));
      d1 = resize_grid(d1, h, w);
      d2 = resize_grid(d2, h, w);
    }
    pyr1.push_back(std::move(d1));
    pyr2.push_back(std::move(d2));
  }

  Grid du, dv;
  for (int l = int(pyr1.size()) - 1; l >= 0; --l) {
    const Grid& f1 = pyr1[std::size_t(l)];
    if (du.empty()) {
      du = Grid(f1.height, f1.width);
      dv = Grid(f1.height, f1.width);
    } else {
      const double fy = double(f1.height) / du.height, fx = double(f1.width) / du.width;
      du = resize_grid(du, f1.height, f1.width);
      dv = resize_grid(dv, f1.height, f1.width);
      for (double& x : du.data) x *= fx;
      for (double& y : dv.data) y *= fy;
    }
    const Expansion e1 = polynomial_expansion(f1, p.poly_n, p.poly_sigma);
    const Expansion e2 = polynomial_expansion(pyr2[std::size_t(l)], p.poly_n, p.poly_sigma);
    refine_level(e1, e2, du, dv, p);
  }

  FlowField out(prev.height, prev.width);
  for (std::size_t i = 0; i < du.size(); ++i) {
    out.u.data[i] = std::isfinite(du.data[i]) ? float(du.data[i]) : 0.f;
    out.v.data[i] = std::isfinite(dv.data[i]) ? float(dv.data[i]) : 0.f;
  }
  return out;
}

FlowField estimate_flow(const Frame& prev, const Frame& next, const FlowParams& params) {
  if (!prev.same_shape(next)) throw ContractError("estimate_flow: frame sizes differ");
  return estimate_flow(luma(prev), luma(next), params);
}

Plane<float> flow_magnitude(const FlowField& flow) {
  Plane<float> mag(flow.height(), flow.width());
  for (std::size_t i = 0; i < mag.size(); ++i) mag.data[i] = std::hypot(flow.u.data[i], flow.v.data[i]);
  return mag;
}

MoMask binarize(const Plane<float>& magnitude, double tau) {
  if (!(tau >= 0.0)) throw ContractError("threshold must be >= 0");
  MoMask mask(magnitude.height, magnitude.width);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.data[i] = double(magnitude.data[i]) > tau ? 255 : 0;
  return mask;
}

namespace {

template <bool Erode>
MoMask morph3x3(const MoMask& src) {
  const int h = src.height, w = src.width;
  MoMask out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = Erode ? 255 : 0;
      for (int j = std::max(0, y - 1); j <= std::min(h - 1, y + 1); ++j)
        for (int i = std::max(0, x - 1); i <= std::min(w - 1, x + 1); ++i)
          v = Erode ? std::min(v, src(j, i)) : std::max(v, src(j, i));
      out(y, x) = v;
    }
  }
  return out;
}

}  // namespace

MoMask erode3x3(const MoMask& mask) { return morph3x3<true>(mask); }
MoMask dilate3x3(const MoMask& mask) { return morph3x3<false>(mask); }

MoMask open_close3x3(const MoMask& mask) {
  const MoMask opened = dilate3x3(erode3x3(mask));
  return erode3x3(dilate3x3(opened));
}

MoMask threshold_mask(const Plane<float>& magnitude, double tau) {
  return open_close3x3(binarize(magnitude, tau));
}

}  // namespace semo
