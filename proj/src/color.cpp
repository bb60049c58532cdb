#include <cmath>

#include "semo/superpixel.hpp"

namespace semo::slic {

namespace {

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

double lab_f(double t) {
  constexpr double eps = 216.0 / 24389.0;
  constexpr double kappa = 24389.0 / 27.0;
  return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

}  // namespace

Lab srgb_to_lab(double r, double g, double b) {
  r = srgb_to_linear(r);
  g = srgb_to_linear(g);
  b = srgb_to_linear(b);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  // D65 reference white
  const double fx = lab_f(x / 0.95047);
  const double fy = lab_f(y / 1.0);
  const double fz = lab_f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Image<double> to_lab(const Frame& frame) {
  if (frame.channels != 3) throw ContractError("to_lab expects an RGB frame");
  Image<double> lab(3, frame.height, frame.width);
  const std::size_t n = frame.plane_size();
  for (std::size_t i = 0; i < n; ++i) {
    const Lab v = srgb_to_lab(frame.data[i], frame.data[n + i], frame.data[2 * n + i]);
    lab.data[i] = v.l;
    lab.data[n + i] = v.a;
    lab.data[2 * n + i] = v.b;
  }
  return lab;
}

}  // namespace semo::slic
