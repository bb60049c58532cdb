#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "semo/checkpoint.hpp"
#include "semo/config.hpp"
#include "semo/moloss.hpp"
#include "semo/optical_flow.hpp"
#include "semo/scoring.hpp"
#include "semo/superpixel.hpp"
#include "semo/video_io.hpp"

namespace semo {

SlicParams slic_params(const PipelineConfig& cfg);

/// Motion analysis of one clip. Entry k describes frame k and comes from the flow between frames k and k+1.
struct ClipMotion {
  std::vector<MoMask> masks;
  std::vector<SuperpixelMap> superpixels;  // SLIC on frame k restricted to masks[k]
  std::vector<FlowField> flows;            // empty unless requested
};

ClipMotion analyze_motion(const Clip& clip, const PipelineConfig& cfg, bool keep_flows = false);

/// Summed mask of the N_f input frames feeding the prediction of frame t.
SBM cuboid_sbm(const ClipMotion& motion, int t, int n);
std::vector<SuperpixelMap> cuboid_superpixels(const ClipMotion& motion, int t, int n);

struct Sample {
  int clip = 0;
  int t = 0;  // predicted frame
  std::uint64_t key() const noexcept { return (std::uint64_t(clip) << 32) | std::uint32_t(t); }
};

struct TrainingSet {
  std::vector<Clip> clips;
  std::vector<ClipMotion> motion;
  std::vector<Sample> samples;  // clip order, then frame order
};

/// Runs motion analysis on every clip and enumerates every predictable frame.
/// Clips with fewer than N_f + 1 frames are skipped with a warning.
TrainingSet prepare_training_set(std::vector<Clip> clips, const PipelineConfig& cfg);

struct EpochLog {
  int epoch = 0;  // 1-based
  double l_m = 0, l_s = 0, total = 0;
};

struct TrainOptions {
  std::optional<Checkpoint> resume;
  std::filesystem::path checkpoint_path;  // written after every epoch when set
  std::filesystem::path log_path;         // CSV epoch,l_m,l_s,total; appended to on resume
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> epochs;
  std::vector<double> step_losses;  // mean total loss of every optimizer step
};

/// Minibatch training with RandomSEMO and the configured loss. A non-finite loss or gradient
/// writes the last good state to checkpoint_path (when set) and throws NumericError.
TrainResult train(const TrainingSet& data, const PipelineConfig& cfg, const TrainOptions& options = {});

/// Eval-mode predictions for frames N_f..len-1, without RandomSEMO.
std::vector<Frame> predict_clip(const ModelConfig& model, const ModelParams<float>& params, const Clip& clip,
                                int batch_size);

/// PSNR and normality of every predictable frame. Returns nothing (with a warning) for clips
/// shorter than N_f + 1.
std::optional<ScoreSeries> score_clip(const ModelConfig& model, const ModelParams<float>& params, const Clip& clip,
                                      const PipelineConfig& cfg);
std::vector<ScoreSeries> score_clips(const ModelConfig& model, const ModelParams<float>& params,
                                     const std::vector<Clip>& clips, const PipelineConfig& cfg);

/// Writes flows (.flo), masks (PGM), superpixel maps (16-bit PGM) and weight maps (PGM) of one clip
/// under `dir`; with `erased` also the RandomSEMO output of every cuboid as PNGs.
void write_motion_artifacts(const std::filesystem::path& dir, const Clip& clip, const ClipMotion& motion,
                            const PipelineConfig& cfg, bool erased);

}  // namespace semo
