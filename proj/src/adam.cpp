#include "semo/adam.hpp"

#include <cmath>

#include "semo/error.hpp"

namespace semo {

AdamConfig AdamConfig::from(const PipelineConfig& cfg) {
  return {cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon};
}

template <typename T>
AdamState<T> AdamState<T>::zeros(const ModelParams<T>& params) {
  return {zeros_like(params), zeros_like(params), 0};
}

namespace {

template <typename T>
void check_finite(std::span<const T> grad, const std::string& name) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw NumericError("non-finite gradient in " + name + " at element " + std::to_string(i));
}

template <typename T>
void update_unchecked(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                      std::int64_t step, const AdamConfig& cfg) {
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, double(step));
  const double c2 = 1.0 - std::pow(b2, double(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double mi = b1 * m[i] + (1.0 - b1) * g;
    const double vi = b2 * v[i] + (1.0 - b2) * g * g;
    m[i] = T(mi);
    v[i] = T(vi);
    param[i] = T(param[i] - cfg.learning_rate * (mi / c1) / (std::sqrt(vi / c2) + cfg.epsilon));
  }
}

}  // namespace

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                 const AdamConfig& cfg, const std::string& name) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size())
    throw ContractError("adam: size mismatch for " + name);
  if (step < 1) throw ContractError("adam: step must be >= 1");
  check_finite(grad, name);
  update_unchecked(param, grad, m, v, step, cfg);
}

template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamState<T>& state, const AdamConfig& cfg) {
  auto p = params.entries();
  const auto g = grads.entries();
  auto m = state.m.entries();
  auto v = state.v.entries();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i].trainable) continue;
    const std::size_t n = p[i].values->size();
    if (g[i].values->size() != n || m[i].values->size() != n || v[i].values->size() != n)
      throw ContractError("adam: size mismatch for " + p[i].name);
    check_finite(std::span<const T>(*g[i].values), p[i].name);
  }
  const std::int64_t step = state.step + 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i].trainable) continue;
    update_unchecked(std::span<T>(*p[i].values), std::span<const T>(*g[i].values), std::span<T>(*m[i].values),
                     std::span<T>(*v[i].values), step, cfg);
  }
  state.step = step;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_update(std::span<float>, std::span<const float>, std::span<float>, std::span<float>,
                          std::int64_t, const AdamConfig&, const std::string&);
template void adam_update(std::span<double>, std::span<const double>, std::span<double>, std::span<double>,
                          std::int64_t, const AdamConfig&, const std::string&);
template void adam_step(ModelParams<float>&, const ModelParams<float>&, AdamState<float>&, const AdamConfig&);
template void adam_step(ModelParams<double>&, const ModelParams<double>&, AdamState<double>&, const AdamConfig&);

}  // namespace semo
