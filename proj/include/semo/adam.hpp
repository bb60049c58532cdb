#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "semo/autoencoder.hpp"

namespace semo {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;

  static AdamConfig from(const PipelineConfig& cfg);
};

/// First and second moments shaped like the parameters, plus the number of completed steps.
template <typename T>
struct AdamState {
  ModelParams<T> m;
  ModelParams<T> v;
  std::int64_t step = 0;

  static AdamState zeros(const ModelParams<T>& params);
  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected update of a flat tensor at step `step` (1-based).
/// Throws NumericError naming `name` on a non-finite gradient, before touching anything.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                 const AdamConfig& cfg, const std::string& name = "param");

/// Updates every trainable tensor; running statistics are left alone.
/// All gradients are checked before any parameter moves.
template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, const AdamConfig& cfg);

}  // namespace semo
