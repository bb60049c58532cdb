#pragma once

// Central finite-difference check of the full model + loss, shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "semo/autoencoder.hpp"
#include "semo/moloss.hpp"
#include "semo/rng.hpp"

namespace testing {

struct GradcheckReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // FD step crossed an activation or |·| kink
  double max_rel = 0.0;
  std::string worst;
};

inline double rel_err(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

struct TinyProblem {
  semo::ModelConfig cfg;
  semo::ModelParams<double> params;
  semo::Tensor5<double> input;
  std::vector<semo::Image<double>> targets;
  std::vector<semo::MOWM> weights;
  semo::LossConfig loss;

  explicit TinyProblem(std::uint64_t seed, int batch = 8) {
    cfg.frames = 3;
    cfg.height = 8;
    cfg.width = 8;
    cfg.channels = {2, 3, 4};
    params = semo::init_params<double>(cfg, seed);
    semo::SplitMix rng(semo::hash_key(seed, 77));
    // Non-trivial affine terms so every normalization parameter matters.
    for (auto& e : params.entries()) {
      if (e.name.ends_with("gamma"))
        for (auto& v : *e.values) v = rng.uniform(0.5, 1.5);
      if (e.name.ends_with("beta"))
        for (auto& v : *e.values) v = rng.uniform(-0.5, 0.5);
    }
    input = semo::Tensor5<double>(batch, 3, cfg.frames, cfg.height, cfg.width);
    for (auto& v : input.data) v = rng.uniform();
    for (int b = 0; b < batch; ++b) {
      semo::Image<double> t(3, cfg.height, cfg.width);
      for (auto& v : t.data) v = rng.uniform();
      targets.push_back(t);
      semo::SBM sbm(cfg.height, cfg.width);
      for (auto& v : sbm.data) v = rng.uniform() < 0.2 ? 255 : 0;
      sbm(b, b) = 255;
      weights.push_back(semo::compute_mowm(sbm));
    }
  }

  // Loss and the sign pattern of every kinked quantity it passed through.
  double loss_value(const semo::ModelParams<double>& p, std::vector<signed char>* signs = nullptr) const {
    semo::Tape<double> tape;
    const auto out = semo::forward(cfg, p, input, semo::Mode::Train, &tape);
    double total = 0;
    for (int b = 0; b < out.batch(); ++b) {
      const auto pred = semo::output_image(out, b);
      total += semo::moloss(pred, targets[std::size_t(b)], weights[std::size_t(b)], loss).first.total;
      if (signs)
        for (std::size_t i = 0; i < pred.size(); ++i)
          signs->push_back(pred.data[i] > targets[std::size_t(b)].data[i] ? 1 : -1);
    }
    if (signs) {
      auto add = [signs](const semo::Tensor5<double>& t) {
        for (double v : t.data) signs->push_back(v > 0 ? 1 : -1);
      };
      add(tape.enc1.bn);
      add(tape.enc2.bn);
      add(tape.enc3.bn);
      add(tape.aspp_sum);
      add(tape.dec1.bn);
      add(tape.dec2.bn);
      add(tape.dec3.bn);
    }
    return total;
  }

  semo::ModelParams<double> analytic() const {
    semo::Tape<double> tape;
    const auto out = semo::forward(cfg, params, input, semo::Mode::Train, &tape);
    semo::Tensor5<double> d(out.batch(), out.channels(), 1, out.height(), out.width());
    for (int b = 0; b < out.batch(); ++b) {
      const auto grad = semo::moloss(semo::output_image(out, b), targets[std::size_t(b)], weights[std::size_t(b)], loss).second;
      std::copy(grad.data.begin(), grad.data.end(), d.data.begin() + std::ptrdiff_t(std::size_t(b) * grad.size()));
    }
    return semo::backward(cfg, params, tape, d);
  }
};

inline GradcheckReport gradcheck_model(std::uint64_t seed, double h = 1e-4) {
  TinyProblem prob(seed);
  const auto grads = prob.analytic();
  GradcheckReport r;
  semo::ModelParams<double> p = prob.params;
  auto pe = p.entries();
  const auto ge = grads.entries();
  for (std::size_t k = 0; k < pe.size(); ++k) {
    if (!pe[k].trainable) continue;
    auto& values = *pe[k].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      std::vector<signed char> s_plus, s_minus;
      values[i] = saved + h;
      const double f_plus = prob.loss_value(p, &s_plus);
      values[i] = saved - h;
      const double f_minus = prob.loss_value(p, &s_minus);
      values[i] = saved;
      if (s_plus != s_minus) {
        ++r.skipped;
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2 * h);
      const double e = rel_err((*ge[k].values)[i], numeric);
      ++r.checked;
      if (e > r.max_rel) {
        r.max_rel = e;
        r.worst = pe[k].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

// Gradient of the loss alone w.r.t. the prediction.
inline GradcheckReport gradcheck_loss(std::uint64_t seed, double h = 1e-4) {
  semo::SplitMix rng(semo::hash_key(seed, 91));
  const int H = 8, W = 8;
  semo::Image<double> pred(3, H, W), target(3, H, W);
  for (auto& v : pred.data) v = rng.uniform(0.05, 0.95);
  for (auto& v : target.data) v = rng.uniform(0.05, 0.95);
  semo::SBM sbm(H, W);
  for (auto& v : sbm.data) v = rng.uniform() < 0.25 ? 255 : 0;
  sbm(3, 4) = 255;
  const semo::MOWM mowm = semo::compute_mowm(sbm);
  const semo::LossConfig cfg;
  const auto grad = semo::moloss(pred, target, mowm, cfg).second;
  GradcheckReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double saved = pred.data[i];
    if (std::abs(saved - target.data[i]) < 2 * h) {
      ++r.skipped;
      continue;
    }
    pred.data[i] = saved + h;
    const double f_plus = semo::moloss(pred, target, mowm, cfg).first.total;
    pred.data[i] = saved - h;
    const double f_minus = semo::moloss(pred, target, mowm, cfg).first.total;
    pred.data[i] = saved;
    const double e = rel_err(grad.data[i], (f_plus - f_minus) / (2 * h));
    ++r.checked;
    if (e > r.max_rel) {
      r.max_rel = e;
      r.worst = "pred[" + std::to_string(i) + "]";
    }
  }
  return r;
}

}  // namespace testing
