#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "semo/error.hpp"

namespace semo {

/// Dense (batch, channel, time, height, width) tensor.
template <typename T>
struct Tensor5 {
  std::array<int, 5> dims{};
  std::vector<T> data;

  Tensor5() = default;
  Tensor5(int n, int c, int t, int h, int w, T fill = T{})
      : dims{n, c, t, h, w}, data(std::size_t(n) * c * t * h * w, fill) {
    for (int d : dims)
      if (d <= 0) throw ContractError("tensor dimensions must be positive");
  }

  int batch() const noexcept { return dims[0]; }
  int channels() const noexcept { return dims[1]; }
  int frames() const noexcept { return dims[2]; }
  int height() const noexcept { return dims[3]; }
  int width() const noexcept { return dims[4]; }
  std::size_t volume() const noexcept { return std::size_t(dims[2]) * dims[3] * dims[4]; }
  std::size_t size() const noexcept { return data.size(); }

  /// Start of the (n, c) volume.
  T* slab(int n, int c) { return data.data() + (std::size_t(n) * dims[1] + c) * volume(); }
  const T* slab(int n, int c) const { return data.data() + (std::size_t(n) * dims[1] + c) * volume(); }

  T& operator()(int n, int c, int t, int y, int x) {
    return data[(((std::size_t(n) * dims[1] + c) * dims[2] + t) * dims[3] + y) * dims[4] + x];
  }
  const T& operator()(int n, int c, int t, int y, int x) const {
    return data[(((std::size_t(n) * dims[1] + c) * dims[2] + t) * dims[3] + y) * dims[4] + x];
  }
  bool same_shape(const Tensor5& o) const noexcept { return dims == o.dims; }
};

}  // namespace semo
