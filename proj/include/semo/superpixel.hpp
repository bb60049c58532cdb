#pragma once

#include <cstdint>
#include <vector>

#include "semo/image.hpp"
#include "semo/optical_flow.hpp"

namespace semo {

/// Per-pixel superpixel labels: -1 off-mask, 0..count-1 on it.
struct SuperpixelMap {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<int> labels;

  SuperpixelMap() = default;
  SuperpixelMap(int h, int w) : height(h), width(w), labels(std::size_t(h) * w, -1) {}
  int& operator()(int y, int x) { return labels[std::size_t(y) * width + x]; }
  int operator()(int y, int x) const { return labels[std::size_t(y) * width + x]; }
  bool operator==(const SuperpixelMap&) const = default;
};

struct BoundingBox {
  int y0 = 0, x0 = 0, y1 = 0, x1 = 0;  // inclusive
};

/// One 4-connected foreground component of a mask.
struct RegionSpec {
  int id = 0;
  BoundingBox box;
  std::vector<int> pixels;  // linear indices y*width + x, raster order
};

struct SlicParams {
  int max_superpixels = 10;
  double compactness = 10.0;
  int iterations = 10;
  int pixels_per_superpixel = 64;
  int min_region_area = 16;
};

/// 4-connected components in raster order of first pixel; components under `min_area` are dropped.
std::vector<RegionSpec> connected_components(const MoMask& mask, int min_area = 16);

/// SLIC restricted to one region. Labels outside the region stay -1.
SuperpixelMap slic_region(const Frame& frame, const RegionSpec& region, const SlicParams& params);

/// SLIC over every retained region of `mask`, labels renumbered to be globally unique.
SuperpixelMap superpixels_for_frame(const Frame& frame, const MoMask& mask, const SlicParams& params);

/// Label map as 16-bit gray: label + 1, 0 off-mask.
Plane<std::uint16_t> label_image(const SuperpixelMap& map);

namespace slic {

struct Lab {
  double l = 0, a = 0, b = 0;
};

/// sRGB [0,1] to CIELAB (D65).
Lab srgb_to_lab(double r, double g, double b);
Image<double> to_lab(const Frame& frame);

struct Seed {
  double l = 0, a = 0, b = 0;
  double y = 0, x = 0;
};

/// Target cluster count min(N_sp, max(1, floor(area / pixels_per_superpixel))).
int cluster_count(std::size_t area, const SlicParams& params);

/// Grid seeds over the region, each nudged to the lowest-gradient region pixel in its 3×3 neighborhood.
std::vector<Seed> initial_seeds(const Image<double>& lab, const RegionSpec& region, int k);

/// Assigns each region pixel to the nearest seed by D² = d_lab² + (d_xy / S)² m².
/// Windowed: only seeds within ±S of the pixel compete; pixels no seed reaches fall back to all seeds.
/// Ties go to the lowest seed index. Result is indexed like region.pixels.
std::vector<int> assign_serial(const Image<double>& lab, const RegionSpec& region,
                               const std::vector<Seed>& seeds, double step, double compactness, bool windowed);
std::vector<int> assign(const Image<double>& lab, const RegionSpec& region, const std::vector<Seed>& seeds,
                        double step, double compactness, bool windowed);

/// Squared SLIC distance of a pixel to a seed.
double distance2(const Image<double>& lab, int y, int x, const Seed& s, double step, double compactness);

/// Relabels non-dominant fragments of each label into their most-adjacent neighbor label,
/// then compacts labels to 0..K-1 in ascending order of original label. Returns K.
int enforce_connectivity(const RegionSpec& region, int width, std::vector<int>& assignment);

}  // namespace slic

}  // namespace semo
