#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "semo/config.hpp"
#include "semo/image.hpp"
#include "semo/optical_flow.hpp"

namespace semo {

/// Summed binary mask: pixelwise min(Σ masks, 255).
using SBM = Plane<std::uint8_t>;

/// Moving-object weight map: 255 on the foreground, 255 - distance elsewhere, floored at 0.
using MOWM = Plane<double>;

/// Throws ContractError on an empty list or mismatched sizes.
SBM compute_sbm(const std::vector<MoMask>& masks);

/// Exact Euclidean distance transform of the foreground, mapped to 255 - d and clamped at 0.
/// An all-background map yields zeros and a warning.
MOWM compute_mowm(const SBM& sbm);

/// 8-bit rendering of a weight map (values rounded).
Plane<std::uint8_t> mowm_to_gray(const MOWM& mowm);

struct LossConfig {
  double eta = 1.0;
  double weight_l1 = 0.25;
  double weight_ssim = 0.75;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
  bool ssim_product_denominator = false;
  LossKind kind = LossKind::MOLoss;

  static LossConfig from(const PipelineConfig& cfg);
};

struct LossBreakdown {
  double l_m = 0.0;  // L1-type term (weighted for MOLoss, plain for the ablations)
  double l_s = 0.0;  // SSIM loss
  double total = 0.0;
};

/// Scalar loss with its gradient w.r.t. the prediction.
template <typename T>
struct LossValue {
  double value = 0.0;
  Image<T> grad;
};

/// (1 / (H·W)) Σ_pixels (MOWM + eta) Σ_channels |pred - target|; subgradient sign(0) = 0.
template <typename T>
LossValue<T> weighted_l1(const Image<T>& pred, const Image<T>& target, const MOWM& mowm, double eta);

/// Unweighted counterpart of weighted_l1 (every weight 1).
template <typename T>
LossValue<T> plain_l1(const Image<T>& pred, const Image<T>& target);

/// 1 - SSIM from whole-frame statistics, averaged over channels.
/// The product-denominator variant uses 2μx²μy² + c1 as the luminance denominator.
template <typename T>
LossValue<T> ssim_loss(const Image<T>& pred, const Image<T>& target, double c1, double c2,
                       bool product_denominator = false);

/// Combined objective selected by cfg.kind; MOLoss is w_m·L_m + w_s·L_s.
template <typename T>
std::pair<LossBreakdown, Image<T>> moloss(const Image<T>& pred, const Image<T>& target, const MOWM& mowm,
                                          const LossConfig& cfg);

}  // namespace semo
