#pragma once

#include <array>
#include <span>
#include <vector>

#include "semo/tensor.hpp"

namespace semo::kernels {

/// 3-D convolution geometry; arrays are (time, height, width).
/// Weights are laid out (out_channels, in_channels, kt, kh, kw).
struct ConvGeometry {
  int in_channels = 1;
  int out_channels = 1;
  std::array<int, 3> kernel{1, 1, 1};
  std::array<int, 3> stride{1, 1, 1};
  std::array<int, 3> padding{0, 0, 0};
  std::array<int, 3> dilation{1, 1, 1};

  std::size_t weight_count() const noexcept {
    return std::size_t(out_channels) * in_channels * kernel[0] * kernel[1] * kernel[2];
  }
  int fan_in() const noexcept { return in_channels * kernel[0] * kernel[1] * kernel[2]; }
  /// Output extent along axis `a` for an input extent `in` (floor convention).
  int output_extent(int a, int in) const noexcept {
    return (in + 2 * padding[std::size_t(a)] - dilation[std::size_t(a)] * (kernel[std::size_t(a)] - 1) - 1) /
               stride[std::size_t(a)] +
           1;
  }
};

// OpenMP kernels. Each output element is owned by one thread and summed in a fixed order,
// so results do not depend on the thread count.

/// y = conv(x) (+ bias when non-empty). `out` must be pre-shaped; it is overwritten.
template <typename T>
void conv3d_forward(const Tensor5<T>& x, std::span<const T> weight, std::span<const T> bias,
                    const ConvGeometry& g, Tensor5<T>& out);

/// dx = convᵀ(dy). `dx` must be pre-shaped to the convolution input; it is overwritten.
template <typename T>
void conv3d_backward_input(const Tensor5<T>& dy, std::span<const T> weight, const ConvGeometry& g,
                           Tensor5<T>& dx);

/// Accumulates dW (and db when non-empty) for y = conv(x).
template <typename T>
void conv3d_backward_params(const Tensor5<T>& x, const Tensor5<T>& dy, const ConvGeometry& g,
                            std::span<T> dweight, std::span<T> dbias);

namespace serial {

// Direct loop nests over output positions, kept as the reference for the kernels above.

template <typename T>
void conv3d_forward(const Tensor5<T>& x, std::span<const T> weight, std::span<const T> bias,
                    const ConvGeometry& g, Tensor5<T>& out);
template <typename T>
void conv3d_backward_input(const Tensor5<T>& dy, std::span<const T> weight, const ConvGeometry& g,
                           Tensor5<T>& dx);
template <typename T>
void conv3d_backward_params(const Tensor5<T>& x, const Tensor5<T>& dy, const ConvGeometry& g,
                            std::span<T> dweight, std::span<T> dbias);

}  // namespace serial

/// Throws ContractError unless x, y and the geometry agree.
template <typename T>
void check_conv_shapes(const Tensor5<T>& x, const Tensor5<T>& y, const ConvGeometry& g);

}  // namespace semo::kernels
