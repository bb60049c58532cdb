#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace semo {

/// Training objective. MOLoss is the full method; the others are ablation baselines.
enum class LossKind { MOLoss, L1, SSIM, L1PlusSSIM };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Every knob of the pipeline. Defaults are the published full-scale settings.
struct PipelineConfig {
  // data
  int frames = 5;  // frames per input cuboid
  int height = 240;
  int width = 360;

  // RandomSEMO
  int max_superpixels = 10;
  double erase_probability = 0.3;
  double flow_threshold = 1.0;  // px/frame
  double slic_compactness = 10.0;
  int slic_iterations = 10;
  bool randomsemo = true;

  // loss
  LossKind loss = LossKind::MOLoss;
  double eta = 1.0;
  double weight_l1 = 0.25;
  double weight_ssim = 0.75;
  bool ssim_product_denominator = false;
  bool psnr_linear_peak = false;

  // model
  std::array<int, 3> channels = {32, 64, 128};

  // optimization
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double adam_epsilon = 1e-8;
  int batch_size = 30;
  int epochs = 40;

  std::uint64_t seed = 0;
  int threads = 0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Reads a JSON object whose keys are the field names above. Unknown keys are errors.
/// Missing keys keep the value already in `base`.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
PipelineConfig config_from_json_text(const std::string& text, PipelineConfig base = {});
std::string config_to_json_text(const PipelineConfig& cfg);

/// Desk-scale defaults used by the synthetic benchmark.
PipelineConfig desk_scale_config();

}  // namespace semo
