#include "semo/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "semo/error.hpp"

namespace semo {

std::vector<RegionSpec> connected_components(const MoMask& mask, int min_area) {
  const int h = mask.height, w = mask.width;
  std::vector<int> visited(mask.size(), 0);
  std::vector<RegionSpec> regions;
  std::vector<int> stack;
  for (int start = 0; start < int(mask.size()); ++start) {
    if (mask.data[std::size_t(start)] == 0 || visited[std::size_t(start)]) continue;
    RegionSpec r;
    r.box = {start / w, start % w, start / w, start % w};
    stack.assign(1, start);
    visited[std::size_t(start)] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      r.pixels.push_back(p);
      const int y = p / w, x = p % w;
      r.box.y0 = std::min(r.box.y0, y);
      r.box.y1 = std::max(r.box.y1, y);
      r.box.x0 = std::min(r.box.x0, x);
      r.box.x1 = std::max(r.box.x1, x);
      const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
        const int q = n[0] * w + n[1];
        if (mask.data[std::size_t(q)] == 0 || visited[std::size_t(q)]) continue;
        visited[std::size_t(q)] = 1;
        stack.push_back(q);
      }
    }
    if (int(r.pixels.size()) < min_area) continue;
    std::sort(r.pixels.begin(), r.pixels.end());
    r.id = int(regions.size());
    regions.push_back(std::move(r));
  }
  return regions;
}

namespace slic {
namespace {

// Region-local index lookup over the bounding box.
struct LocalIndex {
  BoundingBox box;
  int bw = 0, bh = 0;
  std::vector<int> index;

  LocalIndex(const RegionSpec& region, int width) : box(region.box) {
    bh = box.y1 - box.y0 + 1;
    bw = box.x1 - box.x0 + 1;
    index.assign(std::size_t(bh) * bw, -1);
    for (std::size_t i = 0; i < region.pixels.size(); ++i) {
      const int p = region.pixels[i];
      index[std::size_t(p / width - box.y0) * bw + std::size_t(p % width - box.x0)] = int(i);
    }
  }
  int at(int y, int x) const {
    if (y < box.y0 || y > box.y1 || x < box.x0 || x > box.x1) return -1;
    return index[std::size_t(y - box.y0) * bw + std::size_t(x - box.x0)];
  }
};

double gradient_at(const Image<double>& lab, int y, int x) {
  const int h = lab.height, w = lab.width;
  const int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
  const int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
  double g = 0;
  for (int c = 0; c < 3; ++c) {
    const double dx = lab(c, y, xr) - lab(c, y, xl);
    const double dy = lab(c, yd, x) - lab(c, yu, x);
    g += dx * dx + dy * dy;
  }
  return g;
}

void nearest_over_all(const Image<double>& lab, int y, int x, const std::vector<Seed>& seeds, double step,
                      double m, int& best, double& best_d) {
  for (int k = 0; k < int(seeds.size()); ++k) {
    const double d = distance2(lab, y, x, seeds[std::size_t(k)], step, m);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
}

std::vector<Seed> update_centers(const Image<double>& lab, const RegionSpec& region, int width,
                                 const std::vector<int>& assignment, std::vector<Seed> seeds) {
  const std::size_t k = seeds.size();
  std::vector<double> sl(k), sa(k), sb(k), sy(k), sx(k);
  std::vector<std::size_t> n(k);
  for (std::size_t i = 0; i < region.pixels.size(); ++i) {
    const int lbl = assignment[i];
    if (lbl < 0) continue;
    const int p = region.pixels[i];
    const int y = p / width, x = p % width;
    const auto s = std::size_t(lbl);
    sl[s] += lab(0, y, x);
    sa[s] += lab(1, y, x);
    sb[s] += lab(2, y, x);
    sy[s] += y;
    sx[s] += x;
    ++n[s];
  }
  for (std::size_t s = 0; s < k; ++s) {
    if (n[s] == 0) continue;
    const double inv = 1.0 / double(n[s]);
    seeds[s] = {sl[s] * inv, sa[s] * inv, sb[s] * inv, sy[s] * inv, sx[s] * inv};
  }
  return seeds;
}

}  // namespace

int cluster_count(std::size_t area, const SlicParams& params) {
  const auto by_area = std::max<std::size_t>(1, area / std::size_t(std::max(1, params.pixels_per_superpixel)));
  return int(std::min<std::size_t>(std::size_t(std::max(1, params.max_superpixels)), by_area));
}

double distance2(const Image<double>& lab, int y, int x, const Seed& s, double step, double m) {
  const double dl = lab(0, y, x) - s.l;
  const double da = lab(1, y, x) - s.a;
  const double db = lab(2, y, x) - s.b;
  const double dy = y - s.y, dx = x - s.x;
  return dl * dl + da * da + db * db + (dy * dy + dx * dx) / (step * step) * m * m;
}

std::vector<Seed> initial_seeds(const Image<double>& lab, const RegionSpec& region, int k) {
  if (region.pixels.empty()) throw ContractError("initial_seeds: empty region");
  if (k < 1) throw ContractError("initial_seeds: k must be >= 1");
  const int width = lab.width;
  const LocalIndex local(region, width);
  const double area = double(region.pixels.size());

  std::vector<int> candidates;
  double s = std::sqrt(area / k);
  while (true) {
    candidates.clear();
    if (s <= 1.0) {
      candidates = region.pixels;
      break;
    }
    for (int gy = 0;; ++gy) {
      const int y = local.box.y0 + int(std::floor(s / 2 + gy * s));
      if (y > local.box.y1) break;
      for (int gx = 0;; ++gx) {
        const int x = local.box.x0 + int(std::floor(s / 2 + gx * s));
        if (x > local.box.x1) break;
        if (local.at(y, x) >= 0) candidates.push_back(y * width + x);
      }
    }
    if (int(candidates.size()) >= k) break;
    s *= 0.9;
  }

  std::vector<int> chosen;
  if (int(candidates.size()) == k) {
    chosen = candidates;
  } else {
    for (int i = 0; i < k; ++i)
      chosen.push_back(candidates[std::size_t((2 * std::size_t(i) + 1) * candidates.size() / (2 * std::size_t(k)))]);
  }

  std::vector<Seed> seeds;
  seeds.reserve(chosen.size());
  for (int p : chosen) {
    int by = p / width, bx = p % width;
    double best = gradient_at(lab, by, bx);
    const int cy = by, cx = bx;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int y = cy + dy, x = cx + dx;
        if (local.at(y, x) < 0) continue;
        const double g = gradient_at(lab, y, x);
        if (g < best) {
          best = g;
          by = y;
          bx = x;
        }
      }
    }
    seeds.push_back({lab(0, by, bx), lab(1, by, bx), lab(2, by, bx), double(by), double(bx)});
  }
  return seeds;
}

std::vector<int> assign_serial(const Image<double>& lab, const RegionSpec& region, const std::vector<Seed>& seeds,
                               double step, double m, bool windowed) {
  const int width = lab.width;
  const std::size_t n = region.pixels.size();
  std::vector<int> label(n, -1);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  if (windowed) {
    const LocalIndex local(region, width);
    for (int k = 0; k < int(seeds.size()); ++k) {
      const Seed& s = seeds[std::size_t(k)];
      const int ylo = std::max(local.box.y0, int(std::ceil(s.y - step)));
      const int yhi = std::min(local.box.y1, int(std::floor(s.y + step)));
      const int xlo = std::max(local.box.x0, int(std::ceil(s.x - step)));
      const int xhi = std::min(local.box.x1, int(std::floor(s.x + step)));
      for (int y = ylo; y <= yhi; ++y) {
        for (int x = xlo; x <= xhi; ++x) {
          const int i = local.at(y, x);
          if (i < 0) continue;
          const double d = distance2(lab, y, x, s, step, m);
          if (d < dist[std::size_t(i)]) {
            dist[std::size_t(i)] = d;
            label[std::size_t(i)] = k;
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    const int p = region.pixels[i];
    double best_d = std::numeric_limits<double>::infinity();
    nearest_over_all(lab, p / width, p % width, seeds, step, m, label[i], best_d);
  }
  return label;
}

std::vector<int> assign(const Image<double>& lab, const RegionSpec& region, const std::vector<Seed>& seeds,
                        double step, double m, bool windowed) {
  const int width = lab.width;
  const std::ptrdiff_t n = std::ptrdiff_t(region.pixels.size());
  std::vector<int> label(std::size_t(n), -1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const int p = region.pixels[std::size_t(i)];
    const int y = p / width, x = p % width;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    if (windowed) {
      for (int k = 0; k < int(seeds.size()); ++k) {
        const Seed& s = seeds[std::size_t(k)];
        if (std::abs(y - s.y) > step || std::abs(x - s.x) > step) continue;
        const double d = distance2(lab, y, x, s, step, m);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
    }
    if (best < 0) nearest_over_all(lab, y, x, seeds, step, m, best, best_d);
    label[std::size_t(i)] = best;
  }
  return label;
}

int enforce_connectivity(const RegionSpec& region, int width, std::vector<int>& assignment) {
  const LocalIndex local(region, width);
  const std::size_t n = region.pixels.size();
  if (assignment.size() != n) throw ContractError("enforce_connectivity: assignment size mismatch");

  // Same-label 4-connected fragments.
  std::vector<int> comp(n, -1);
  std::vector<int> comp_label, comp_size;
  std::vector<int> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    const int c = int(comp_label.size());
    comp_label.push_back(assignment[i]);
    comp_size.push_back(0);
    comp[i] = c;
    stack.assign(1, int(i));
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      ++comp_size[std::size_t(c)];
      const int p = region.pixels[std::size_t(j)];
      const int y = p / width, x = p % width;
      const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& q : nbr) {
        const int k = local.at(q[0], q[1]);
        if (k < 0 || comp[std::size_t(k)] >= 0 || assignment[std::size_t(k)] != assignment[i]) continue;
        comp[std::size_t(k)] = c;
        stack.push_back(k);
      }
    }
  }

  const std::size_t ncomp = comp_label.size();
  std::map<int, int> dominant;  // label -> component
  for (std::size_t c = 0; c < ncomp; ++c) {
    auto it = dominant.find(comp_label[c]);
    if (it == dominant.end() || comp_size[c] > comp_size[std::size_t(it->second)])
      dominant[comp_label[c]] = int(c);
  }
  std::vector<char> resolved(ncomp, 0);
  for (const auto& [lbl, c] : dominant) resolved[std::size_t(c)] = 1;

  // Boundary contact counts between fragments.
  std::vector<std::map<int, int>> contacts(ncomp);
  for (std::size_t i = 0; i < n; ++i) {
    const int p = region.pixels[i];
    const int y = p / width, x = p % width;
    const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
    for (const auto& q : nbr) {
      const int k = local.at(q[0], q[1]);
      if (k < 0 || comp[std::size_t(k)] == comp[i]) continue;
      ++contacts[std::size_t(comp[i])][comp[std::size_t(k)]];
    }
  }

  bool pending = true;
  while (pending) {
    pending = false;
    bool progress = false;
    for (std::size_t c = 0; c < ncomp; ++c) {
      if (resolved[c]) continue;
      std::map<int, int> by_label;
      for (const auto& [other, count] : contacts[c])
        if (resolved[std::size_t(other)]) by_label[comp_label[std::size_t(other)]] += count;
      if (by_label.empty()) {
        pending = true;
        continue;
      }
      int best_label = by_label.begin()->first, best_count = by_label.begin()->second;
      for (const auto& [lbl, count] : by_label)
        if (count > best_count) {
          best_label = lbl;
          best_count = count;
        }
      comp_label[c] = best_label;
      resolved[c] = 1;
      progress = true;
    }
    if (pending && !progress) throw ContractError("enforce_connectivity: region is not connected");
  }

  std::map<int, int> compact;
  for (std::size_t c = 0; c < ncomp; ++c) compact.emplace(comp_label[c], 0);
  int next = 0;
  for (auto& [lbl, idx] : compact) idx = next++;
  for (std::size_t i = 0; i < n; ++i) assignment[i] = compact[comp_label[std::size_t(comp[i])]];
  return next;
}

}  // namespace slic

namespace {

int slic_into(const Image<double>& lab, const RegionSpec& region, const SlicParams& params, int label_offset,
              SuperpixelMap& out) {
  const int k = slic::cluster_count(region.pixels.size(), params);
  const double step = std::sqrt(double(region.pixels.size()) / k);
  std::vector<slic::Seed> seeds = slic::initial_seeds(lab, region, k);
  for (int it = 0; it < params.iterations; ++it) {
    const auto labels = slic::assign(lab, region, seeds, step, params.compactness, true);
    seeds = slic::update_centers(lab, region, lab.width, labels, std::move(seeds));
  }
  auto labels = slic::assign(lab, region, seeds, step, params.compactness, true);
  const int count = slic::enforce_connectivity(region, lab.width, labels);
  for (std::size_t i = 0; i < region.pixels.size(); ++i)
    out.labels[std::size_t(region.pixels[i])] = labels[i] + label_offset;
  return count;
}

}  // namespace

SuperpixelMap slic_region(const Frame& frame, const RegionSpec& region, const SlicParams& params) {
  if (region.pixels.empty()) throw ContractError("slic_region: empty region");
  if (params.max_superpixels < 1) throw ContractError("slic_region: N_sp must be >= 1");
  const Image<double> lab = slic::to_lab(frame);
  SuperpixelMap out(frame.height, frame.width);
  out.count = slic_into(lab, region, params, 0, out);
  return out;
}

SuperpixelMap superpixels_for_frame(const Frame& frame, const MoMask& mask, const SlicParams& params) {
  if (mask.height != frame.height || mask.width != frame.width)
    throw ContractError("superpixels_for_frame: mask and frame sizes differ");
  SuperpixelMap out(frame.height, frame.width);
  const auto regions = connected_components(mask, params.min_region_area);
  if (regions.empty()) return out;
  const Image<double> lab = slic::to_lab(frame);
  for (const auto& region : regions) out.count += slic_into(lab, region, params, out.count, out);
  return out;
}

Plane<std::uint16_t> label_image(const SuperpixelMap& map) {
  Plane<std::uint16_t> out(map.height, map.width);
  for (std::size_t i = 0; i < map.labels.size(); ++i)
    out.data[i] = std::uint16_t(std::clamp(map.labels[i] + 1, 0, 65535));
  return out;
}

}  // namespace semo
