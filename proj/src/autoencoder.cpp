#include "semo/autoencoder.hpp"

#include <algorithm>
#include <cmath>

#include "semo/error.hpp"
#include "semo/rng.hpp"

namespace semo {

using kernels::ConvGeometry;

ModelConfig ModelConfig::from(const PipelineConfig& cfg) {
  ModelConfig m;
  m.frames = cfg.frames;
  m.height = cfg.height;
  m.width = cfg.width;
  m.channels = cfg.channels;
  return m;
}

ModelLayout ModelLayout::build(const ModelConfig& cfg) {
  if (cfg.frames < 1 || cfg.height < 1 || cfg.width < 1 || cfg.in_channels < 1 || cfg.out_channels < 1)
    throw ContractError("model: input dimensions must be positive");
  const auto [c1, c2, c3] = cfg.channels;
  if (c1 < 1 || c2 < 1 || c3 < 1) throw ContractError("model: channel widths must be positive");

  ModelLayout l;
  l.extent[0] = {cfg.frames, cfg.height, cfg.width};
  auto advance = [&](int level, const ConvGeometry& g) {
    for (int a = 0; a < 3; ++a) {
      l.extent[std::size_t(level) + 1][std::size_t(a)] = g.output_extent(a, l.extent[std::size_t(level)][std::size_t(a)]);
      if (l.extent[std::size_t(level) + 1][std::size_t(a)] < 1) throw ContractError("model: input too small");
    }
  };

  l.enc[0] = {cfg.in_channels, c1, {3, 3, 3}, {2, 2, 2}, {1, 1, 1}, {1, 1, 1}};
  advance(0, l.enc[0]);
  l.enc[1] = {c1, c2, {3, 3, 3}, {2, 2, 2}, {1, 1, 1}, {1, 1, 1}};
  advance(1, l.enc[1]);
  // The last encoder layer spans whatever temporal extent remains, leaving a single time step.
  l.enc[2] = {c2, c3, {l.extent[2][0], 3, 3}, {1, 2, 2}, {0, 1, 1}, {1, 1, 1}};
  advance(2, l.enc[2]);

  for (std::size_t b = 0; b < 3; ++b) {
    const int r = cfg.aspp_rates[b];
    if (r < 1) throw ContractError("model: ASPP rates must be positive");
    l.aspp[b] = {c3, c3, {1, 3, 3}, {1, 1, 1}, {0, r, r}, {1, r, r}};
  }

  // Transposed layers, expressed as the convolution they invert (input side = decoder output).
  l.dec[0] = {c2, c3, {3, 3, 3}, {1, 2, 2}, {1, 1, 1}, {1, 1, 1}};
  l.dec[1] = {c1, 2 * c2, {3, 3, 3}, {1, 2, 2}, {1, 1, 1}, {1, 1, 1}};
  l.dec[2] = {c1, 2 * c1, {3, 3, 3}, {1, 2, 2}, {1, 1, 1}, {1, 1, 1}};
  l.head = {c1, cfg.out_channels, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, {1, 1, 1}};

  // Each decoder output must map back onto the activation it mirrors.
  const std::array<std::array<int, 2>, 3> dec_out = {{{l.extent[2][1], l.extent[2][2]},
                                                       {l.extent[1][1], l.extent[1][2]},
                                                       {l.extent[0][1], l.extent[0][2]}}};
  const std::array<std::array<int, 2>, 3> dec_in = {{{l.extent[3][1], l.extent[3][2]},
                                                      {l.extent[2][1], l.extent[2][2]},
                                                      {l.extent[1][1], l.extent[1][2]}}};
  for (std::size_t j = 0; j < 3; ++j) {
    if (l.dec[j].output_extent(0, 1) != 1 || l.dec[j].output_extent(1, dec_out[j][0]) != dec_in[j][0] ||
        l.dec[j].output_extent(2, dec_out[j][1]) != dec_in[j][1])
      throw ContractError("model: decoder shapes do not chain");
  }
  return l;
}

// ---------------------------------------------------------------------------------------------
// parameters

template <typename T>
std::vector<typename ModelParams<T>::Entry> ModelParams<T>::entries() {
  std::vector<Entry> out;
  auto layer = [&](const std::string& name, LayerParams<T>& p) {
    out.push_back({name + ".conv.weight", &p.conv.weight, true});
    out.push_back({name + ".conv.bias", &p.conv.bias, true});
    out.push_back({name + ".bn.gamma", &p.norm.gamma, true});
    out.push_back({name + ".bn.beta", &p.norm.beta, true});
    out.push_back({name + ".bn.running_mean", &p.norm.running_mean, false});
    out.push_back({name + ".bn.running_var", &p.norm.running_var, false});
  };
  layer("enc1", enc1);
  layer("enc2", enc2);
  layer("enc3", enc3);
  for (std::size_t b = 0; b < aspp.size(); ++b) layer("aspp" + std::to_string(b), aspp[b]);
  layer("dec1", dec1);
  layer("dec2", dec2);
  layer("dec3", dec3);
  out.push_back({"head.conv.weight", &head.weight, true});
  out.push_back({"head.conv.bias", &head.bias, true});
  return out;
}

template <typename T>
std::vector<typename ModelParams<T>::ConstEntry> ModelParams<T>::entries() const {
  std::vector<ConstEntry> out;
  for (const auto& e : const_cast<ModelParams*>(this)->entries()) out.push_back({e.name, e.values, e.trainable});
  return out;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries())
    if (e.trainable) n += e.values->size();
  return n;
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out;
  auto src = entries();
  auto dst = out.entries();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i].values->assign(src[i].values->begin(), src[i].values->end());
  return out;
}

namespace {

template <typename T>
void init_conv(ConvParams<T>& p, std::size_t weights, int out_channels, double fan_in, SplitMix& rng) {
  const double wb = std::sqrt(6.0 / fan_in);
  const double bb = 1.0 / std::sqrt(fan_in);
  p.weight.resize(weights);
  for (auto& w : p.weight) w = T(rng.uniform(-wb, wb));
  p.bias.resize(std::size_t(out_channels));
  for (auto& b : p.bias) b = T(rng.uniform(-bb, bb));
}

template <typename T>
void init_norm(NormParams<T>& p, int channels) {
  p.gamma.assign(std::size_t(channels), T(1));
  p.beta.assign(std::size_t(channels), T(0));
  p.running_mean.assign(std::size_t(channels), T(0));
  p.running_var.assign(std::size_t(channels), T(1));
}

// Fan-in of a transposed layer: each output sees in_channels × (spatial taps / stride²) inputs,
// with one live temporal tap.
double deconv_fan_in(const ConvGeometry& g) {
  return double(g.out_channels) * g.kernel[1] * g.kernel[2] / double(g.stride[1] * g.stride[2]);
}

}  // namespace

template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  const ModelLayout l = ModelLayout::build(cfg);
  SplitMix rng(hash_key(seed, 0x1417ULL));
  ModelParams<T> p;
  auto enc = [&](LayerParams<T>& layer, const ConvGeometry& g) {
    init_conv(layer.conv, g.weight_count(), g.out_channels, double(g.fan_in()), rng);
    init_norm(layer.norm, g.out_channels);
  };
  auto dec = [&](LayerParams<T>& layer, const ConvGeometry& g) {
    // Transposed: bias and norm live on the decoder output = g.in_channels.
    init_conv(layer.conv, g.weight_count(), g.in_channels, deconv_fan_in(g), rng);
    init_norm(layer.norm, g.in_channels);
  };
  enc(p.enc1, l.enc[0]);
  enc(p.enc2, l.enc[1]);
  enc(p.enc3, l.enc[2]);
  for (std::size_t b = 0; b < 3; ++b) enc(p.aspp[b], l.aspp[b]);
  dec(p.dec1, l.dec[0]);
  dec(p.dec2, l.dec[1]);
  dec(p.dec3, l.dec[2]);
  init_conv(p.head, l.head.weight_count(), l.head.out_channels, double(l.head.fan_in()), rng);
  return p;
}

template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& params) {
  ModelParams<T> out;
  auto src = params.entries();
  auto dst = out.entries();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i].values->assign(src[i].values->size(), T(0));
  return out;
}

// ---------------------------------------------------------------------------------------------
// layer primitives

namespace {

template <typename T>
Tensor5<T> make_like(int n, int c, const std::array<int, 3>& e) {
  return Tensor5<T>(n, c, e[0], e[1], e[2]);
}

template <typename T>
void check_layer(const std::vector<T>& v, std::size_t n, const char* what) {
  if (v.size() != n) throw ContractError(std::string("model parameters: wrong size for ") + what);
}

template <typename T>
void batch_norm_forward(const NormParams<T>& p, Mode mode, double eps, BlockCache<T>& c) {
  const int N = c.conv.batch(), C = c.conv.channels();
  const std::size_t vol = c.conv.volume();
  const double count = double(N) * double(vol);
  c.xhat = c.conv;
  c.bn = c.conv;
  c.mean.assign(std::size_t(C), 0.0);
  c.var.assign(std::size_t(C), 0.0);
  c.inv_std.assign(std::size_t(C), 0.0);
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < C; ++ch) {
    double mean, var;
    if (mode == Mode::Train) {
      double s = 0;
      for (int n = 0; n < N; ++n) {
        const T* x = c.conv.slab(n, ch);
        for (std::size_t i = 0; i < vol; ++i) s += x[i];
      }
      mean = s / count;
      double v = 0;
      for (int n = 0; n < N; ++n) {
        const T* x = c.conv.slab(n, ch);
        for (std::size_t i = 0; i < vol; ++i) v += (x[i] - mean) * (x[i] - mean);
      }
      var = v / count;
    } else {
      mean = p.running_mean[std::size_t(ch)];
      var = p.running_var[std::size_t(ch)];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps);
    c.mean[std::size_t(ch)] = mean;
    c.var[std::size_t(ch)] = var;
    c.inv_std[std::size_t(ch)] = inv_std;
    const T g = p.gamma[std::size_t(ch)], b = p.beta[std::size_t(ch)];
    for (int n = 0; n < N; ++n) {
      const T* x = c.conv.slab(n, ch);
      T* xh = c.xhat.slab(n, ch);
      T* y = c.bn.slab(n, ch);
      for (std::size_t i = 0; i < vol; ++i) {
        xh[i] = T((x[i] - mean) * inv_std);
        y[i] = g * xh[i] + b;
      }
    }
  }
}

// Train-mode batch-norm backward: returns d(conv), accumulates dγ, dβ.
template <typename T>
Tensor5<T> batch_norm_backward(const NormParams<T>& p, const BlockCache<T>& c, const Tensor5<T>& d_bn,
                               NormParams<T>& grad) {
  const int N = c.conv.batch(), C = c.conv.channels();
  const std::size_t vol = c.conv.volume();
  const double count = double(N) * double(vol);
  Tensor5<T> dx = d_bn;
#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < C; ++ch) {
    double sum_dy = 0, sum_dy_xhat = 0;
    for (int n = 0; n < N; ++n) {
      const T* dy = d_bn.slab(n, ch);
      const T* xh = c.xhat.slab(n, ch);
      for (std::size_t i = 0; i < vol; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += double(dy[i]) * xh[i];
      }
    }
    grad.gamma[std::size_t(ch)] += T(sum_dy_xhat);
    grad.beta[std::size_t(ch)] += T(sum_dy);
    const double g = p.gamma[std::size_t(ch)];
    const double scale = g * c.inv_std[std::size_t(ch)];
    const double mean_dy = sum_dy / count, mean_dy_xhat = sum_dy_xhat / count;
    for (int n = 0; n < N; ++n) {
      const T* dy = d_bn.slab(n, ch);
      const T* xh = c.xhat.slab(n, ch);
      T* out = dx.slab(n, ch);
      for (std::size_t i = 0; i < vol; ++i) out[i] = T(scale * (dy[i] - mean_dy - xh[i] * mean_dy_xhat));
    }
  }
  return dx;
}

template <typename T>
void leaky_relu_forward(const Tensor5<T>& x, Tensor5<T>& y, double slope) {
  y = x;
  const T s = T(slope);
  for (auto& v : y.data) v = v > 0 ? v : s * v;
}

template <typename T>
void leaky_relu_backward(const Tensor5<T>& pre, Tensor5<T>& d, double slope) {
  const T s = T(slope);
  for (std::size_t i = 0; i < d.size(); ++i) d.data[i] = pre.data[i] > 0 ? d.data[i] : s * d.data[i];
}

template <typename T>
std::span<const T> cspan(const std::vector<T>& v) {
  return {v.data(), v.size()};
}
template <typename T>
std::span<T> mspan(std::vector<T>& v) {
  return {v.data(), v.size()};
}

template <typename T>
void encoder_block(const Tensor5<T>& in, const LayerParams<T>& p, const ConvGeometry& g,
                   const std::array<int, 3>& out_extent, Mode mode, const ModelConfig& cfg, BlockCache<T>& c) {
  check_layer(p.conv.weight, g.weight_count(), "encoder weight");
  check_layer(p.conv.bias, std::size_t(g.out_channels), "encoder bias");
  c.conv = make_like<T>(in.batch(), g.out_channels, out_extent);
  kernels::conv3d_forward(in, cspan(p.conv.weight), cspan(p.conv.bias), g, c.conv);
  batch_norm_forward(p.norm, mode, cfg.bn_eps, c);
  leaky_relu_forward(c.bn, c.act, cfg.leaky_slope);
}

template <typename T>
void decoder_block(const Tensor5<T>& in, const LayerParams<T>& p, const ConvGeometry& g,
                   const std::array<int, 3>& out_extent, Mode mode, const ModelConfig& cfg, BlockCache<T>& c) {
  check_layer(p.conv.weight, g.weight_count(), "decoder weight");
  check_layer(p.conv.bias, std::size_t(g.in_channels), "decoder bias");
  c.conv = make_like<T>(in.batch(), g.in_channels, out_extent);
  kernels::conv3d_backward_input(in, cspan(p.conv.weight), g, c.conv);
  for (int n = 0; n < c.conv.batch(); ++n)
    for (int ch = 0; ch < c.conv.channels(); ++ch) {
      T* y = c.conv.slab(n, ch);
      const T b = p.conv.bias[std::size_t(ch)];
      for (std::size_t i = 0; i < c.conv.volume(); ++i) y[i] += b;
    }
  batch_norm_forward(p.norm, mode, cfg.bn_eps, c);
  leaky_relu_forward(c.bn, c.act, 0.0);
}

template <typename T>
Tensor5<T> temporal_mean(const Tensor5<T>& x) {
  Tensor5<T> out(x.batch(), x.channels(), 1, x.height(), x.width());
  const std::size_t plane = std::size_t(x.height()) * x.width();
  const T inv = T(1) / T(x.frames());
  for (int n = 0; n < x.batch(); ++n)
    for (int c = 0; c < x.channels(); ++c) {
      const T* src = x.slab(n, c);
      T* dst = out.slab(n, c);
      for (int t = 0; t < x.frames(); ++t)
        for (std::size_t i = 0; i < plane; ++i) dst[i] += src[std::size_t(t) * plane + i];
      for (std::size_t i = 0; i < plane; ++i) dst[i] *= inv;
    }
  return out;
}

template <typename T>
void temporal_mean_backward(const Tensor5<T>& d_mean, Tensor5<T>& d_x) {
  const std::size_t plane = std::size_t(d_x.height()) * d_x.width();
  const T inv = T(1) / T(d_x.frames());
  for (int n = 0; n < d_x.batch(); ++n)
    for (int c = 0; c < d_x.channels(); ++c) {
      const T* src = d_mean.slab(n, c);
      T* dst = d_x.slab(n, c);
      for (int t = 0; t < d_x.frames(); ++t)
        for (std::size_t i = 0; i < plane; ++i) dst[std::size_t(t) * plane + i] += src[i] * inv;
    }
}

template <typename T>
Tensor5<T> concat_channels(const Tensor5<T>& a, const Tensor5<T>& b) {
  Tensor5<T> out(a.batch(), a.channels() + b.channels(), a.frames(), a.height(), a.width());
  for (int n = 0; n < a.batch(); ++n) {
    for (int c = 0; c < a.channels(); ++c) std::copy_n(a.slab(n, c), a.volume(), out.slab(n, c));
    for (int c = 0; c < b.channels(); ++c) std::copy_n(b.slab(n, c), b.volume(), out.slab(n, a.channels() + c));
  }
  return out;
}

template <typename T>
void split_channels(const Tensor5<T>& d, Tensor5<T>& da, Tensor5<T>& db) {
  for (int n = 0; n < d.batch(); ++n) {
    for (int c = 0; c < da.channels(); ++c) std::copy_n(d.slab(n, c), da.volume(), da.slab(n, c));
    for (int c = 0; c < db.channels(); ++c) std::copy_n(d.slab(n, da.channels() + c), db.volume(), db.slab(n, c));
  }
}

template <typename T>
void add_into(Tensor5<T>& dst, const Tensor5<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

// Backward through conv → BN → activation of an encoder-style block; returns d(input).
template <typename T>
Tensor5<T> encoder_block_backward(const Tensor5<T>& in, const LayerParams<T>& p, const ConvGeometry& g,
                                  const BlockCache<T>& c, Tensor5<T> d_act, double slope, LayerParams<T>& grad,
                                  bool need_input_grad) {
  leaky_relu_backward(c.bn, d_act, slope);
  const Tensor5<T> d_conv = batch_norm_backward(p.norm, c, d_act, grad.norm);
  kernels::conv3d_backward_params(in, d_conv, g, mspan(grad.conv.weight), mspan(grad.conv.bias));
  if (!need_input_grad) return {};
  Tensor5<T> d_in(in.batch(), in.channels(), in.frames(), in.height(), in.width());
  kernels::conv3d_backward_input(d_conv, cspan(p.conv.weight), g, d_in);
  return d_in;
}

template <typename T>
Tensor5<T> decoder_block_backward(const Tensor5<T>& in, const LayerParams<T>& p, const ConvGeometry& g,
                                  const BlockCache<T>& c, Tensor5<T> d_act, LayerParams<T>& grad) {
  leaky_relu_backward(c.bn, d_act, 0.0);
  const Tensor5<T> d_conv = batch_norm_backward(p.norm, c, d_act, grad.norm);
  // Transposed conv: out = convᵀ(in), so d(in) = conv(d_out) and dW pairs d_out with in.
  kernels::conv3d_backward_params(d_conv, in, g, mspan(grad.conv.weight), std::span<T>{});
  for (int n = 0; n < d_conv.batch(); ++n)
    for (int ch = 0; ch < d_conv.channels(); ++ch) {
      const T* d = d_conv.slab(n, ch);
      T acc = 0;
      for (std::size_t i = 0; i < d_conv.volume(); ++i) acc += d[i];
      grad.conv.bias[std::size_t(ch)] += acc;
    }
  Tensor5<T> d_in(in.batch(), in.channels(), in.frames(), in.height(), in.width());
  kernels::conv3d_forward(d_conv, cspan(p.conv.weight), std::span<const T>{}, g, d_in);
  return d_in;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// forward / backward

template <typename T>
Tensor5<T> forward(const ModelConfig& cfg, const ModelParams<T>& params, const Tensor5<T>& input, Mode mode,
                   Tape<T>* tape_out) {
  const ModelLayout l = ModelLayout::build(cfg);
  if (input.channels() != cfg.in_channels || input.frames() != cfg.frames || input.height() != cfg.height ||
      input.width() != cfg.width)
    throw ContractError("forward: input dimensions do not match the model configuration");

  Tape<T> local;
  Tape<T>& tp = tape_out ? *tape_out : local;
  tp.mode = mode;
  tp.input = input;
  const int N = input.batch();

  encoder_block(input, params.enc1, l.enc[0], l.extent[1], mode, cfg, tp.enc1);
  encoder_block(tp.enc1.act, params.enc2, l.enc[1], l.extent[2], mode, cfg, tp.enc2);
  encoder_block(tp.enc2.act, params.enc3, l.enc[2], l.extent[3], mode, cfg, tp.enc3);

  tp.aspp_sum = make_like<T>(N, cfg.channels[2], l.extent[3]);
  for (std::size_t b = 0; b < 3; ++b) {
    BlockCache<T>& c = tp.aspp[b];
    const auto& p = params.aspp[b];
    check_layer(p.conv.weight, l.aspp[b].weight_count(), "aspp weight");
    c.conv = make_like<T>(N, cfg.channels[2], l.extent[3]);
    kernels::conv3d_forward(tp.enc3.act, cspan(p.conv.weight), cspan(p.conv.bias), l.aspp[b], c.conv);
    batch_norm_forward(p.norm, mode, cfg.bn_eps, c);
    add_into(tp.aspp_sum, c.bn);
  }
  leaky_relu_forward(tp.aspp_sum, tp.aspp_act, cfg.leaky_slope);

  const std::array<int, 3> e2{1, l.extent[2][1], l.extent[2][2]};
  const std::array<int, 3> e1{1, l.extent[1][1], l.extent[1][2]};
  const std::array<int, 3> e0{1, l.extent[0][1], l.extent[0][2]};

  decoder_block(tp.aspp_act, params.dec1, l.dec[0], e2, mode, cfg, tp.dec1);
  tp.skip2 = temporal_mean(tp.enc2.act);
  tp.cat1 = concat_channels(tp.dec1.act, tp.skip2);
  decoder_block(tp.cat1, params.dec2, l.dec[1], e1, mode, cfg, tp.dec2);
  tp.skip1 = temporal_mean(tp.enc1.act);
  tp.cat2 = concat_channels(tp.dec2.act, tp.skip1);
  decoder_block(tp.cat2, params.dec3, l.dec[2], e0, mode, cfg, tp.dec3);

  check_layer(params.head.weight, l.head.weight_count(), "head weight");
  tp.logits = make_like<T>(N, cfg.out_channels, e0);
  kernels::conv3d_forward(tp.dec3.act, cspan(params.head.weight), cspan(params.head.bias), l.head, tp.logits);
  tp.output = tp.logits;
  for (auto& v : tp.output.data) v = T(1) / (T(1) + std::exp(-v));
  return tp.output;
}

template <typename T>
ModelParams<T> backward(const ModelConfig& cfg, const ModelParams<T>& params, const Tape<T>& tp,
                        const Tensor5<T>& d_output) {
  if (tp.mode != Mode::Train) throw ContractError("backward: tape must come from a train-mode forward");
  if (!d_output.same_shape(tp.output)) throw ContractError("backward: cotangent shape does not match the output");
  const ModelLayout l = ModelLayout::build(cfg);
  ModelParams<T> grad = zeros_like(params);

  Tensor5<T> d_logits = d_output;
  for (std::size_t i = 0; i < d_logits.size(); ++i) {
    const T s = tp.output.data[i];
    d_logits.data[i] *= s * (T(1) - s);
  }
  kernels::conv3d_backward_params(tp.dec3.act, d_logits, l.head, mspan(grad.head.weight), mspan(grad.head.bias));
  Tensor5<T> d_dec3 = tp.dec3.act;
  kernels::conv3d_backward_input(d_logits, cspan(params.head.weight), l.head, d_dec3);

  const Tensor5<T> d_cat2 = decoder_block_backward(tp.cat2, params.dec3, l.dec[2], tp.dec3, d_dec3, grad.dec3);
  Tensor5<T> d_dec2 = tp.dec2.act, d_skip1 = tp.skip1;
  split_channels(d_cat2, d_dec2, d_skip1);

  const Tensor5<T> d_cat1 = decoder_block_backward(tp.cat1, params.dec2, l.dec[1], tp.dec2, d_dec2, grad.dec2);
  Tensor5<T> d_dec1 = tp.dec1.act, d_skip2 = tp.skip2;
  split_channels(d_cat1, d_dec1, d_skip2);

  Tensor5<T> d_aspp = decoder_block_backward(tp.aspp_act, params.dec1, l.dec[0], tp.dec1, d_dec1, grad.dec1);
  leaky_relu_backward(tp.aspp_sum, d_aspp, cfg.leaky_slope);

  Tensor5<T> d_enc3(tp.enc3.act.batch(), tp.enc3.act.channels(), tp.enc3.act.frames(), tp.enc3.act.height(),
                    tp.enc3.act.width());
  for (std::size_t b = 0; b < 3; ++b) {
    const Tensor5<T> d_conv = batch_norm_backward(params.aspp[b].norm, tp.aspp[b], d_aspp, grad.aspp[b].norm);
    kernels::conv3d_backward_params(tp.enc3.act, d_conv, l.aspp[b], mspan(grad.aspp[b].conv.weight),
                                    mspan(grad.aspp[b].conv.bias));
    Tensor5<T> d_in = d_enc3;
    kernels::conv3d_backward_input(d_conv, cspan(params.aspp[b].conv.weight), l.aspp[b], d_in);
    add_into(d_enc3, d_in);
  }

  Tensor5<T> d_enc2 =
      encoder_block_backward(tp.enc2.act, params.enc3, l.enc[2], tp.enc3, d_enc3, cfg.leaky_slope, grad.enc3, true);
  temporal_mean_backward(d_skip2, d_enc2);
  Tensor5<T> d_enc1 =
      encoder_block_backward(tp.enc1.act, params.enc2, l.enc[1], tp.enc2, d_enc2, cfg.leaky_slope, grad.enc2, true);
  temporal_mean_backward(d_skip1, d_enc1);
  encoder_block_backward(tp.input, params.enc1, l.enc[0], tp.enc1, d_enc1, cfg.leaky_slope, grad.enc1, false);
  return grad;
}

template <typename T>
void update_running_stats(const ModelConfig& cfg, ModelParams<T>& params, const Tape<T>& tp) {
  if (tp.mode != Mode::Train) throw ContractError("update_running_stats: needs a train-mode tape");
  const double m = cfg.bn_momentum;
  auto fold = [m](NormParams<T>& p, const BlockCache<T>& c) {
    const double count = double(c.conv.batch()) * double(c.conv.volume());
    const double unbias = count > 1 ? count / (count - 1) : 1.0;
    for (std::size_t ch = 0; ch < p.running_mean.size(); ++ch) {
      p.running_mean[ch] = T((1 - m) * p.running_mean[ch] + m * c.mean[ch]);
      p.running_var[ch] = T((1 - m) * p.running_var[ch] + m * c.var[ch] * unbias);
    }
  };
  fold(params.enc1.norm, tp.enc1);
  fold(params.enc2.norm, tp.enc2);
  fold(params.enc3.norm, tp.enc3);
  for (std::size_t b = 0; b < 3; ++b) fold(params.aspp[b].norm, tp.aspp[b]);
  fold(params.dec1.norm, tp.dec1);
  fold(params.dec2.norm, tp.dec2);
  fold(params.dec3.norm, tp.dec3);
}

template <typename T>
Tensor5<T> stack_cuboids(const std::vector<FrameCuboid>& cuboids) {
  if (cuboids.empty()) throw ContractError("stack_cuboids: empty batch");
  const FrameCuboid& f = cuboids.front();
  Tensor5<T> out(int(cuboids.size()), f.channels, f.frames, f.height, f.width);
  const std::size_t per = f.data.size();
  for (std::size_t n = 0; n < cuboids.size(); ++n) {
    const FrameCuboid& c = cuboids[n];
    if (c.channels != f.channels || c.frames != f.frames || c.height != f.height || c.width != f.width)
      throw ContractError("stack_cuboids: cuboid shapes differ");
    std::transform(c.data.begin(), c.data.end(), out.data.begin() + std::ptrdiff_t(n * per),
                   [](float v) { return T(v); });
  }
  return out;
}

template <typename T>
Image<T> output_image(const Tensor5<T>& output, int n) {
  if (output.frames() != 1) throw ContractError("output_image: expected a single time step");
  Image<T> img(output.channels(), output.height(), output.width());
  for (int c = 0; c < output.channels(); ++c) std::copy_n(output.slab(n, c), img.plane_size(), img.channel(c));
  return img;
}

Frame predict_frame(const ModelConfig& cfg, const ModelParams<float>& params, const FrameCuboid& cuboid) {
  const Tensor5<float> out = forward(cfg, params, stack_cuboids<float>({cuboid}), Mode::Eval);
  return output_image(out, 0);
}

#define SEMO_INSTANTIATE_MODEL(T)                                                                             \
  template struct ModelParams<T>;                                                                            \
  template ModelParams<T> init_params(const ModelConfig&, std::uint64_t);                                    \
  template ModelParams<T> zeros_like(const ModelParams<T>&);                                                 \
  template Tensor5<T> forward(const ModelConfig&, const ModelParams<T>&, const Tensor5<T>&, Mode, Tape<T>*); \
  template ModelParams<T> backward(const ModelConfig&, const ModelParams<T>&, const Tape<T>&,                \
                                   const Tensor5<T>&);                                                       \
  template void update_running_stats(const ModelConfig&, ModelParams<T>&, const Tape<T>&);                   \
  template Tensor5<T> stack_cuboids(const std::vector<FrameCuboid>&);                                        \
  template Image<T> output_image(const Tensor5<T>&, int);
SEMO_INSTANTIATE_MODEL(float)
SEMO_INSTANTIATE_MODEL(double)
#undef SEMO_INSTANTIATE_MODEL

template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;

}  // namespace semo
