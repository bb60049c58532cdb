#include "semo/moloss.hpp"

#include <algorithm>
#include <cmath>

#include "semo/distance_transform.hpp"
#include "semo/error.hpp"
#include "semo/log.hpp"

namespace semo {

SBM compute_sbm(const std::vector<MoMask>& masks) {
  if (masks.empty()) throw ContractError("compute_sbm: no masks");
  const int h = masks.front().height, w = masks.front().width;
  std::vector<int> sum(std::size_t(h) * w, 0);
  for (const auto& m : masks) {
    if (m.height != h || m.width != w) throw ContractError("compute_sbm: mask sizes differ");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += m.data[i];
  }
  SBM out(h, w);
  for (std::size_t i = 0; i < sum.size(); ++i) out.data[i] = std::uint8_t(std::min(sum[i], 255));
  return out;
}

MOWM compute_mowm(const SBM& sbm) {
  MOWM out(sbm.height, sbm.width, 0.0);
  if (std::none_of(sbm.data.begin(), sbm.data.end(), [](std::uint8_t v) { return v != 0; })) {
    warn("compute_mowm: summed mask has no foreground; weight map is all zero");
    return out;
  }
  const Plane<double> d2 = squared_distance_transform(sbm);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::max(0.0, 255.0 - std::sqrt(d2.data[i]));
  return out;
}

Plane<std::uint8_t> mowm_to_gray(const MOWM& mowm) {
  Plane<std::uint8_t> out(mowm.height, mowm.width);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data[i] = std::uint8_t(std::lround(std::clamp(mowm.data[i], 0.0, 255.0)));
  return out;
}

LossConfig LossConfig::from(const PipelineConfig& cfg) {
  LossConfig c;
  c.eta = cfg.eta;
  c.weight_l1 = cfg.weight_l1;
  c.weight_ssim = cfg.weight_ssim;
  c.ssim_product_denominator = cfg.ssim_product_denominator;
  c.kind = cfg.loss;
  return c;
}

namespace {

template <typename T>
void check_pair(const Image<T>& pred, const Image<T>& target, const char* who) {
  if (!pred.same_shape(target)) throw ContractError(std::string(who) + ": prediction and target shapes differ");
  if (pred.size() == 0) throw ContractError(std::string(who) + ": empty frame");
}

template <typename T>
LossValue<T> l1_with_weights(const Image<T>& pred, const Image<T>& target, const double* weights, double eta) {
  const std::size_t plane = pred.plane_size();
  const double norm = 1.0 / double(plane);
  LossValue<T> out{0.0, Image<T>(pred.channels, pred.height, pred.width)};
  double total = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    const double w = (weights ? weights[i] : 0.0) + eta;
    double abs_sum = 0.0;
    for (int c = 0; c < pred.channels; ++c) {
      const std::size_t k = std::size_t(c) * plane + i;
      const double diff = double(pred.data[k]) - double(target.data[k]);
      abs_sum += std::abs(diff);
      const double sgn = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      out.grad.data[k] = T(w * norm * sgn);
    }
    total += w * abs_sum;
  }
  out.value = total * norm;
  return out;
}

}  // namespace

template <typename T>
LossValue<T> weighted_l1(const Image<T>& pred, const Image<T>& target, const MOWM& mowm, double eta) {
  check_pair(pred, target, "weighted_l1");
  if (mowm.height != pred.height || mowm.width != pred.width)
    throw ContractError("weighted_l1: weight map size differs from frame");
  return l1_with_weights(pred, target, mowm.data.data(), eta);
}

template <typename T>
LossValue<T> plain_l1(const Image<T>& pred, const Image<T>& target) {
  check_pair(pred, target, "plain_l1");
  return l1_with_weights<T>(pred, target, nullptr, 1.0);
}

template <typename T>
LossValue<T> ssim_loss(const Image<T>& pred, const Image<T>& target, double c1, double c2, bool product_denominator) {
  check_pair(pred, target, "ssim_loss");
  const std::size_t n = pred.plane_size();
  const double inv_n = 1.0 / double(n);
  LossValue<T> out{0.0, Image<T>(pred.channels, pred.height, pred.width)};
  double ssim_sum = 0.0;
  const double channel_scale = 1.0 / double(pred.channels);
  for (int c = 0; c < pred.channels; ++c) {
    const T* x = pred.channel(c);
    const T* y = target.channel(c);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx *= inv_n;
    my *= inv_n;
    double vx = 0, vy = 0, cxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = x[i] - mx, dy = y[i] - my;
      vx += dx * dx;
      vy += dy * dy;
      cxy += dx * dy;
    }
    vx *= inv_n;
    vy *= inv_n;
    cxy *= inv_n;

    const double a1 = 2 * mx * my + c1;
    const double a2 = 2 * cxy + c2;
    const double b1 = product_denominator ? 2 * mx * mx * my * my + c1 : mx * mx + my * my + c1;
    const double b2 = vx + vy + c2;
    const double s = (a1 * a2) / (b1 * b2);
    ssim_sum += s;

    // ∂S/∂x_i = S · (a1'/a1 + a2'/a2 - b1'/b1 - b2'/b2), each prime taken w.r.t. x_i.
    const double da1 = 2 * my * inv_n;
    const double db1 = product_denominator ? 4 * mx * my * my * inv_n : 2 * mx * inv_n;
    T* g = out.grad.channel(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double da2 = 2 * (y[i] - my) * inv_n;
      const double db2 = 2 * (x[i] - mx) * inv_n;
      const double ds = (da1 * a2 * b1 * b2 + a1 * da2 * b1 * b2 - a1 * a2 * (db1 * b2 + b1 * db2)) /
                        ((b1 * b2) * (b1 * b2));
      g[i] = T(-channel_scale * ds);
    }
  }
  out.value = 1.0 - ssim_sum * channel_scale;
  return out;
}

template <typename T>
std::pair<LossBreakdown, Image<T>> moloss(const Image<T>& pred, const Image<T>& target, const MOWM& mowm,
                                          const LossConfig& cfg) {
  check_pair(pred, target, "moloss");
  LossValue<T> lm = cfg.kind == LossKind::MOLoss ? weighted_l1(pred, target, mowm, cfg.eta) : plain_l1(pred, target);
  LossValue<T> ls = ssim_loss(pred, target, cfg.c1, cfg.c2, cfg.ssim_product_denominator);

  double wm = cfg.weight_l1, ws = cfg.weight_ssim;
  if (cfg.kind == LossKind::L1) {
    wm = 1.0;
    ws = 0.0;
  } else if (cfg.kind == LossKind::SSIM) {
    wm = 0.0;
    ws = 1.0;
  }
  LossBreakdown b{lm.value, ls.value, wm * lm.value + ws * ls.value};
  Image<T> grad(pred.channels, pred.height, pred.width);
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad.data[i] = T(wm * double(lm.grad.data[i]) + ws * double(ls.grad.data[i]));
  return {b, std::move(grad)};
}

#define SEMO_INSTANTIATE_LOSS(T)                                                                            \
  template LossValue<T> weighted_l1(const Image<T>&, const Image<T>&, const MOWM&, double);                \
  template LossValue<T> plain_l1(const Image<T>&, const Image<T>&);                                        \
  template LossValue<T> ssim_loss(const Image<T>&, const Image<T>&, double, double, bool);                 \
  template std::pair<LossBreakdown, Image<T>> moloss(const Image<T>&, const Image<T>&, const MOWM&,        \
                                                     const LossConfig&);
SEMO_INSTANTIATE_LOSS(float)
SEMO_INSTANTIATE_LOSS(double)
#undef SEMO_INSTANTIATE_LOSS

}  // namespace semo
