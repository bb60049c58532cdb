#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "semo/config.hpp"
#include "semo/image.hpp"
#include "semo/kernels.hpp"
#include "semo/tensor.hpp"
#include "semo/video_io.hpp"

namespace semo {

/// Architecture hyperparameters. Everything else about the network is derived from these.
struct ModelConfig {
  int in_channels = 3;
  int out_channels = 3;
  int frames = 5;
  int height = 240;
  int width = 360;
  std::array<int, 3> channels{32, 64, 128};
  std::array<int, 3> aspp_rates{1, 2, 4};
  double leaky_slope = 0.2;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  static ModelConfig from(const PipelineConfig& cfg);
  bool operator==(const ModelConfig&) const = default;
};

/// Convolution geometry of every layer plus the activation extents (time, height, width).
/// Decoder layers are transposed convolutions; their geometry is that of the forward
/// convolution they transpose (input = decoder output).
struct ModelLayout {
  std::array<kernels::ConvGeometry, 3> enc;
  std::array<kernels::ConvGeometry, 3> aspp;
  std::array<kernels::ConvGeometry, 3> dec;
  kernels::ConvGeometry head;
  std::array<std::array<int, 3>, 4> extent;  // input, enc1, enc2, enc3 outputs

  static ModelLayout build(const ModelConfig& cfg);
};

template <typename T>
struct ConvParams {
  std::vector<T> weight;
  std::vector<T> bias;
  bool operator==(const ConvParams&) const = default;
};

template <typename T>
struct NormParams {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  bool operator==(const NormParams&) const = default;
};

template <typename T>
struct LayerParams {
  ConvParams<T> conv;
  NormParams<T> norm;
  bool operator==(const LayerParams&) const = default;
};

template <typename T>
struct ModelParams {
  LayerParams<T> enc1, enc2, enc3;
  std::array<LayerParams<T>, 3> aspp;
  LayerParams<T> dec1, dec2, dec3;
  ConvParams<T> head;

  struct Entry {
    std::string name;
    std::vector<T>* values;
    bool trainable;
  };
  struct ConstEntry {
    std::string name;
    const std::vector<T>* values;
    bool trainable;
  };

  /// Every tensor in declaration order; running statistics are the non-trainable entries.
  std::vector<Entry> entries();
  std::vector<ConstEntry> entries() const;

  std::size_t parameter_count() const;

  template <typename U>
  ModelParams<U> cast() const;

  bool operator==(const ModelParams&) const = default;
};

/// Fan-in scaled uniform weights, γ = 1, β = 0, running statistics (0, 1).
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Same shapes, all zeros (gradient accumulators, optimizer moments).
template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& params);

enum class Mode { Train, Eval };

template <typename T>
struct BlockCache {
  Tensor5<T> conv;   // convolution output
  Tensor5<T> xhat;   // normalized
  Tensor5<T> bn;     // γ·xhat + β
  Tensor5<T> act;    // after the nonlinearity (unused in ASPP branches)
  std::vector<double> mean, var, inv_std;  // per channel; var is the biased batch variance
};

/// Intermediate activations of one forward pass, consumed by backward().
template <typename T>
struct Tape {
  Mode mode = Mode::Eval;
  Tensor5<T> input;
  BlockCache<T> enc1, enc2, enc3;
  std::array<BlockCache<T>, 3> aspp;
  Tensor5<T> aspp_sum, aspp_act;
  BlockCache<T> dec1, dec2, dec3;
  Tensor5<T> skip1, skip2, cat1, cat2;
  Tensor5<T> logits, output;
};

/// Predicts one frame per batch item: (N, out_channels, 1, H, W) in (0, 1).
/// Train mode normalizes with batch statistics, eval mode with running statistics.
template <typename T>
Tensor5<T> forward(const ModelConfig& cfg, const ModelParams<T>& params, const Tensor5<T>& input, Mode mode,
                   Tape<T>* tape = nullptr);

/// Reverse-mode gradients of Σ d_output ⊙ output w.r.t. every trainable tensor.
/// Requires a train-mode tape.
template <typename T>
ModelParams<T> backward(const ModelConfig& cfg, const ModelParams<T>& params, const Tape<T>& tape,
                        const Tensor5<T>& d_output);

/// Folds the batch statistics of a train-mode tape into the running statistics.
template <typename T>
void update_running_stats(const ModelConfig& cfg, ModelParams<T>& params, const Tape<T>& tape);

/// Stacks cuboids into an (N, C, T, H, W) tensor.
template <typename T>
Tensor5<T> stack_cuboids(const std::vector<FrameCuboid>& cuboids);

/// Batch item `n` of a (N, C, 1, H, W) tensor as a C×H×W image.
template <typename T>
Image<T> output_image(const Tensor5<T>& output, int n);

/// Eval-mode prediction of the frame following `cuboid`.
Frame predict_frame(const ModelConfig& cfg, const ModelParams<float>& params, const FrameCuboid& cuboid);

}  // namespace semo
