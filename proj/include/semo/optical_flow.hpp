#pragma once

#include <cstdint>
#include <filesystem>

#include "semo/image.hpp"

namespace semo {

/// Dense displacement field: prev(x, y) ≈ next(x + u, y + v), in pixels per frame.
struct FlowField {
  Plane<float> u;
  Plane<float> v;

  FlowField() = default;
  FlowField(int h, int w) : u(h, w), v(h, w) {}
  int height() const noexcept { return u.height; }
  int width() const noexcept { return u.width; }
  bool operator==(const FlowField&) const = default;
};

/// Binary moving-object mask, values in {0, 255}.
using MoMask = Plane<std::uint8_t>;

/// Pyramidal polynomial-expansion flow settings.
struct FlowParams {
  int levels = 3;
  double pyramid_scale = 0.5;
  int window = 15;       // averaging window side
  int iterations = 3;    // per level
  int poly_n = 5;        // expansion neighborhood side (odd)
  double poly_sigma = 1.1;
};

/// Estimates dense flow on the luma of both frames. Throws ContractError on size mismatch.
FlowField estimate_flow(const Frame& prev, const Frame& next, const FlowParams& params = {});
FlowField estimate_flow(const Plane<float>& prev, const Plane<float>& next, const FlowParams& params = {});

/// Middlebury .flo: float 202021.25, int32 width, int32 height, then interleaved (u,v) float32 rows.
FlowField load_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);

Plane<float> flow_magnitude(const FlowField& flow);

/// 255 where magnitude > tau, else 0. No cleanup.
MoMask binarize(const Plane<float>& magnitude, double tau);

/// 3×3 square structuring element; out-of-frame neighbors are ignored.
MoMask erode3x3(const MoMask& mask);
MoMask dilate3x3(const MoMask& mask);
MoMask open_close3x3(const MoMask& mask);

/// binarize followed by a 3×3 opening and then a 3×3 closing.
MoMask threshold_mask(const Plane<float>& magnitude, double tau);

}  // namespace semo
