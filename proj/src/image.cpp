#include "semo/image.hpp"

#include <algorithm>
#include <cmath>

namespace semo {

Frame resize_bilinear(const Frame& src, int height, int width) {
  if (height <= 0 || width <= 0) throw ContractError("resize target must be positive");
  if (src.height == height && src.width == width) return src;
  if (src.height == 0 || src.width == 0) throw ContractError("cannot resize an empty frame");

  Frame out(src.channels, height, width);
  const double sy = double(src.height) / height;
  const double sx = double(src.width) / width;

  std::vector<int> x0(width), x1(width);
  std::vector<float> ax(width);
  for (int x = 0; x < width; ++x) {
    double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(src.width - 1));
    x0[x] = int(fx);
    x1[x] = std::min(x0[x] + 1, src.width - 1);
    ax[x] = float(fx - x0[x]);
  }
  for (int c = 0; c < src.channels; ++c) {
    for (int y = 0; y < height; ++y) {
      double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(src.height - 1));
      const int y0 = int(fy);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const float ay = float(fy - y0);
      for (int x = 0; x < width; ++x) {
        // a + (b - a) * t keeps constant inputs exact.
        const float a = src(c, y0, x0[x]);
        const float b = src(c, y1, x0[x]);
        const float top = a + (src(c, y0, x1[x]) - a) * ax[x];
        const float bot = b + (src(c, y1, x1[x]) - b) * ax[x];
        out(c, y, x) = std::clamp(top + (bot - top) * ay, 0.f, 1.f);
      }
    }
  }
  return out;
}

Plane<float> luma(const Frame& frame) {
  Plane<float> out(frame.height, frame.width);
  if (frame.channels == 1) {
    std::copy(frame.data.begin(), frame.data.end(), out.data.begin());
    return out;
  }
  if (frame.channels != 3) throw ContractError("luma expects 1 or 3 channels");
  const float* r = frame.channel(0);
  const float* g = frame.channel(1);
  const float* b = frame.channel(2);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = 0.299f * r[i] + 0.587f * g[i] + 0.114f * b[i];
  return out;
}

}  // namespace semo
