#include <algorithm>

#include "semo/kernels.hpp"

namespace semo::kernels {
namespace {

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
inline int ceil_div(int a, int b) { return -floor_div(-a, b); }

// Output positions o in [0, out) whose input o*s + off falls inside [0, in).
struct Span1 {
  int lo, hi;  // inclusive; empty when lo > hi
};
inline Span1 valid_outputs(int off, int s, int in, int out) {
  return {std::max(0, ceil_div(-off, s)), std::min(out - 1, floor_div(in - 1 - off, s))};
}

inline std::size_t widx(const ConvGeometry& g, int oc, int ic, int kt, int kh, int kw) {
  return (((std::size_t(oc) * g.in_channels + ic) * g.kernel[0] + kt) * g.kernel[1] + kh) * g.kernel[2] + kw;
}

}  // namespace

template <typename T>
void check_conv_shapes(const Tensor5<T>& x, const Tensor5<T>& y, const ConvGeometry& g) {
  if (x.batch() != y.batch()) throw ContractError("conv3d: batch sizes differ");
  if (x.channels() != g.in_channels || y.channels() != g.out_channels)
    throw ContractError("conv3d: channel counts do not match the geometry");
  for (int a = 0; a < 3; ++a)
    if (g.output_extent(a, x.dims[std::size_t(a) + 2]) != y.dims[std::size_t(a) + 2])
      throw ContractError("conv3d: spatial extents do not match the geometry");
}

template <typename T>
void conv3d_forward(const Tensor5<T>& x, std::span<const T> weight, std::span<const T> bias,
                    const ConvGeometry& g, Tensor5<T>& out) {
  check_conv_shapes(x, out, g);
  if (weight.size() != g.weight_count()) throw ContractError("conv3d: weight count mismatch");
  const int N = x.batch(), O = g.out_channels, C = g.in_channels;
  const int Ti = x.frames(), Hi = x.height(), Wi = x.width();
  const int To = out.frames(), Ho = out.height(), Wo = out.width();
  const auto [st, sh, sw] = g.stride;
  const auto [pt, ph, pw] = g.padding;
  const auto [dt, dh, dw] = g.dilation;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int oc = 0; oc < O; ++oc) {
      T* y = out.slab(n, oc);
      std::fill(y, y + out.volume(), bias.empty() ? T(0) : bias[std::size_t(oc)]);
      for (int ic = 0; ic < C; ++ic) {
        const T* xs = x.slab(n, ic);
        for (int kt = 0; kt < g.kernel[0]; ++kt) {
          const int offt = kt * dt - pt;
          const Span1 rt = valid_outputs(offt, st, Ti, To);
          for (int kh = 0; kh < g.kernel[1]; ++kh) {
            const int offh = kh * dh - ph;
            const Span1 rh = valid_outputs(offh, sh, Hi, Ho);
            for (int kw = 0; kw < g.kernel[2]; ++kw) {
              const int offw = kw * dw - pw;
              const Span1 rw = valid_outputs(offw, sw, Wi, Wo);
              const T wv = weight[widx(g, oc, ic, kt, kh, kw)];
              for (int ot = rt.lo; ot <= rt.hi; ++ot) {
                const int it = ot * st + offt;
                for (int oh = rh.lo; oh <= rh.hi; ++oh) {
                  const int ih = oh * sh + offh;
                  const T* xrow = xs + (std::size_t(it) * Hi + ih) * Wi;
                  T* yrow = y + (std::size_t(ot) * Ho + oh) * Wo;
                  for (int ow = rw.lo; ow <= rw.hi; ++ow) yrow[ow] += wv * xrow[ow * sw + offw];
                }
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3d_backward_input(const Tensor5<T>& dy, std::span<const T> weight, const ConvGeometry& g,
                           Tensor5<T>& dx) {
  check_conv_shapes(dx, dy, g);
  if (weight.size() != g.weight_count()) throw ContractError("conv3d: weight count mismatch");
  const int N = dy.batch(), O = g.out_channels, C = g.in_channels;
  const int Ti = dx.frames(), Hi = dx.height(), Wi = dx.width();
  const int To = dy.frames(), Ho = dy.height(), Wo = dy.width();
  const auto [st, sh, sw] = g.stride;
  const auto [pt, ph, pw] = g.padding;
  const auto [dt, dh, dw] = g.dilation;

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int ic = 0; ic < C; ++ic) {
      T* xs = dx.slab(n, ic);
      std::fill(xs, xs + dx.volume(), T(0));
      for (int oc = 0; oc < O; ++oc) {
        const T* ys = dy.slab(n, oc);
        for (int kt = 0; kt < g.kernel[0]; ++kt) {
          const int offt = kt * dt - pt;
          const Span1 rt = valid_outputs(offt, st, Ti, To);
          for (int kh = 0; kh < g.kernel[1]; ++kh) {
            const int offh = kh * dh - ph;
            const Span1 rh = valid_outputs(offh, sh, Hi, Ho);
            for (int kw = 0; kw < g.kernel[2]; ++kw) {
              const int offw = kw * dw - pw;
              const Span1 rw = valid_outputs(offw, sw, Wi, Wo);
              const T wv = weight[widx(g, oc, ic, kt, kh, kw)];
              for (int ot = rt.lo; ot <= rt.hi; ++ot) {
                const int it = ot * st + offt;
                for (int oh = rh.lo; oh <= rh.hi; ++oh) {
                  const int ih = oh * sh + offh;
                  T* xrow = xs + (std::size_t(it) * Hi + ih) * Wi;
                  const T* yrow = ys + (std::size_t(ot) * Ho + oh) * Wo;
                  for (int ow = rw.lo; ow <= rw.hi; ++ow) xrow[ow * sw + offw] += wv * yrow[ow];
                }
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3d_backward_params(const Tensor5<T>& x, const Tensor5<T>& dy, const ConvGeometry& g,
                            std::span<T> dweight, std::span<T> dbias) {
  check_conv_shapes(x, dy, g);
  if (dweight.size() != g.weight_count()) throw ContractError("conv3d: weight gradient size mismatch");
  const int N = x.batch(), O = g.out_channels, C = g.in_channels;
  const int Ti = x.frames(), Hi = x.height(), Wi = x.width();
  const int To = dy.frames(), Ho = dy.height(), Wo = dy.width();
  const auto [st, sh, sw] = g.stride;
  const auto [pt, ph, pw] = g.padding;
  const auto [dt, dh, dw] = g.dilation;

#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < O; ++oc) {
    for (int ic = 0; ic < C; ++ic) {
      for (int kt = 0; kt < g.kernel[0]; ++kt) {
        const int offt = kt * dt - pt;
        const Span1 rt = valid_outputs(offt, st, Ti, To);
        for (int kh = 0; kh < g.kernel[1]; ++kh) {
          const int offh = kh * dh - ph;
          const Span1 rh = valid_outputs(offh, sh, Hi, Ho);
          for (int kw = 0; kw < g.kernel[2]; ++kw) {
            const int offw = kw * dw - pw;
            const Span1 rw = valid_outputs(offw, sw, Wi, Wo);
            T acc = 0;
            for (int n = 0; n < N; ++n) {
              const T* xs = x.slab(n, ic);
              const T* ys = dy.slab(n, oc);
              for (int ot = rt.lo; ot <= rt.hi; ++ot) {
                const int it = ot * st + offt;
                for (int oh = rh.lo; oh <= rh.hi; ++oh) {
                  const int ih = oh * sh + offh;
                  const T* xrow = xs + (std::size_t(it) * Hi + ih) * Wi;
                  const T* yrow = ys + (std::size_t(ot) * Ho + oh) * Wo;
                  for (int ow = rw.lo; ow <= rw.hi; ++ow) acc += yrow[ow] * xrow[ow * sw + offw];
                }
              }
            }
            dweight[widx(g, oc, ic, kt, kh, kw)] += acc;
          }
        }
      }
    }
  }

  if (dbias.empty()) return;
  if (dbias.size() != std::size_t(O)) throw ContractError("conv3d: bias gradient size mismatch");
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < O; ++oc) {
    T acc = 0;
    for (int n = 0; n < N; ++n) {
      const T* ys = dy.slab(n, oc);
      for (std::size_t i = 0; i < dy.volume(); ++i) acc += ys[i];
    }
    dbias[std::size_t(oc)] += acc;
  }
}

#define SEMO_INSTANTIATE_CONV(T)                                                                              \
  template void check_conv_shapes(const Tensor5<T>&, const Tensor5<T>&, const ConvGeometry&);                \
  template void conv3d_forward(const Tensor5<T>&, std::span<const T>, std::span<const T>, const ConvGeometry&, \
                               Tensor5<T>&);                                                                 \
  template void conv3d_backward_input(const Tensor5<T>&, std::span<const T>, const ConvGeometry&, Tensor5<T>&); \
  template void conv3d_backward_params(const Tensor5<T>&, const Tensor5<T>&, const ConvGeometry&, std::span<T>, \
                                       std::span<T>);
SEMO_INSTANTIATE_CONV(float)
SEMO_INSTANTIATE_CONV(double)
#undef SEMO_INSTANTIATE_CONV

}  // namespace semo::kernels
