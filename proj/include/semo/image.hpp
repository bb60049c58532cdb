#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semo/error.hpp"

namespace semo {

/// Single-channel H×W grid, row-major.
template <typename T>
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Plane() = default;
  Plane(int h, int w, T fill = T{}) : height(h), width(w), data(std::size_t(h) * std::size_t(w), fill) {}

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }
  T& operator()(int y, int x) { return data[std::size_t(y) * width + x]; }
  const T& operator()(int y, int x) const { return data[std::size_t(y) * width + x]; }
  bool same_shape(const Plane& o) const noexcept { return height == o.height && width == o.width; }
  bool operator==(const Plane&) const = default;
};

/// Planar C×H×W image.
template <typename T>
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Image() = default;
  Image(int c, int h, int w, T fill = T{})
      : channels(c), height(h), width(w), data(std::size_t(c) * h * w, fill) {}

  std::size_t plane_size() const noexcept { return std::size_t(height) * width; }
  std::size_t size() const noexcept { return data.size(); }
  T& operator()(int c, int y, int x) { return data[(std::size_t(c) * height + y) * width + x]; }
  const T& operator()(int c, int y, int x) const {
    return data[(std::size_t(c) * height + y) * width + x];
  }
  T* channel(int c) { return data.data() + std::size_t(c) * plane_size(); }
  const T* channel(int c) const { return data.data() + std::size_t(c) * plane_size(); }
  bool same_shape(const Image& o) const noexcept {
    return channels == o.channels && height == o.height && width == o.width;
  }
  bool operator==(const Image&) const = default;

  template <typename U>
  Image<U> cast() const {
    Image<U> out(channels, height, width);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

/// RGB frame with values in [0,1].
using Frame = Image<float>;

/// Bilinear resize with half-pixel centers. A same-size call returns a copy.
Frame resize_bilinear(const Frame& src, int height, int width);

/// Rec. 601 luma of an RGB frame (single-channel frames pass through).
Plane<float> luma(const Frame& frame);

}  // namespace semo
