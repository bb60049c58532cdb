#include <algorithm>

#include "semo/kernels.hpp"

namespace semo::kernels::serial {
namespace {

// Visits every (output position, input channel, tap) whose input coordinate is in range.
template <typename T, typename F>
void for_each_tap(const Tensor5<T>& in_shape, const Tensor5<T>& out_shape, const ConvGeometry& g, F&& f) {
  const int N = out_shape.batch();
  for (int n = 0; n < N; ++n)
    for (int oc = 0; oc < g.out_channels; ++oc)
      for (int ot = 0; ot < out_shape.frames(); ++ot)
        for (int oh = 0; oh < out_shape.height(); ++oh)
          for (int ow = 0; ow < out_shape.width(); ++ow)
            for (int ic = 0; ic < g.in_channels; ++ic)
              for (int kt = 0; kt < g.kernel[0]; ++kt) {
                const int it = ot * g.stride[0] - g.padding[0] + kt * g.dilation[0];
                if (it < 0 || it >= in_shape.frames()) continue;
                for (int kh = 0; kh < g.kernel[1]; ++kh) {
                  const int ih = oh * g.stride[1] - g.padding[1] + kh * g.dilation[1];
                  if (ih < 0 || ih >= in_shape.height()) continue;
                  for (int kw = 0; kw < g.kernel[2]; ++kw) {
                    const int iw = ow * g.stride[2] - g.padding[2] + kw * g.dilation[2];
                    if (iw < 0 || iw >= in_shape.width()) continue;
                    const std::size_t w =
                        (((std::size_t(oc) * g.in_channels + ic) * g.kernel[0] + kt) * g.kernel[1] + kh) *
                            g.kernel[2] +
                        kw;
                    f(n, oc, ot, oh, ow, ic, it, ih, iw, w);
                  }
                }
              }
}

}  // namespace

template <typename T>
void conv3d_forward(const Tensor5<T>& x, std::span<const T> weight, std::span<const T> bias,
                    const ConvGeometry& g, Tensor5<T>& out) {
  check_conv_shapes(x, out, g);
  for (int n = 0; n < out.batch(); ++n)
    for (int oc = 0; oc < out.channels(); ++oc)
      std::fill(out.slab(n, oc), out.slab(n, oc) + out.volume(), bias.empty() ? T(0) : bias[std::size_t(oc)]);
  for_each_tap(x, out, g, [&](int n, int oc, int ot, int oh, int ow, int ic, int it, int ih, int iw, std::size_t w) {
    out(n, oc, ot, oh, ow) += weight[w] * x(n, ic, it, ih, iw);
  });
}

template <typename T>
void conv3d_backward_input(const Tensor5<T>& dy, std::span<const T> weight, const ConvGeometry& g,
                           Tensor5<T>& dx) {
  check_conv_shapes(dx, dy, g);
  std::fill(dx.data.begin(), dx.data.end(), T(0));
  for_each_tap(dx, dy, g, [&](int n, int oc, int ot, int oh, int ow, int ic, int it, int ih, int iw, std::size_t w) {
    dx(n, ic, it, ih, iw) += weight[w] * dy(n, oc, ot, oh, ow);
  });
}

template <typename T>
void conv3d_backward_params(const Tensor5<T>& x, const Tensor5<T>& dy, const ConvGeometry& g,
                            std::span<T> dweight, std::span<T> dbias) {
  check_conv_shapes(x, dy, g);
  for_each_tap(x, dy, g, [&](int n, int oc, int ot, int oh, int ow, int ic, int it, int ih, int iw, std::size_t w) {
    dweight[w] += dy(n, oc, ot, oh, ow) * x(n, ic, it, ih, iw);
  });
  if (dbias.empty()) return;
  for (int n = 0; n < dy.batch(); ++n)
    for (int oc = 0; oc < dy.channels(); ++oc)
      for (std::size_t i = 0; i < dy.volume(); ++i) dbias[std::size_t(oc)] += dy.slab(n, oc)[i];
}

#define SEMO_INSTANTIATE_SERIAL(T)                                                                            \
  template void conv3d_forward(const Tensor5<T>&, std::span<const T>, std::span<const T>, const ConvGeometry&, \
                               Tensor5<T>&);                                                                 \
  template void conv3d_backward_input(const Tensor5<T>&, std::span<const T>, const ConvGeometry&, Tensor5<T>&); \
  template void conv3d_backward_params(const Tensor5<T>&, const Tensor5<T>&, const ConvGeometry&, std::span<T>, \
                                       std::span<T>);
SEMO_INSTANTIATE_SERIAL(float)
SEMO_INSTANTIATE_SERIAL(double)
#undef SEMO_INSTANTIATE_SERIAL

}  // namespace semo::kernels::serial
