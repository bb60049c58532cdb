#include "semo/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "semo/adam.hpp"
#include "semo/error.hpp"
#include "semo/image_io.hpp"
#include "semo/log.hpp"
#include "semo/randomsemo.hpp"
#include "semo/rng.hpp"

namespace semo {

SlicParams slic_params(const PipelineConfig& cfg) {
  SlicParams p;
  p.max_superpixels = cfg.max_superpixels;
  p.compactness = cfg.slic_compactness;
  p.iterations = cfg.slic_iterations;
  return p;
}

ClipMotion analyze_motion(const Clip& clip, const PipelineConfig& cfg, bool keep_flows) {
  ClipMotion m;
  const int pairs = std::max(0, clip.size() - 1);
  m.masks.resize(std::size_t(pairs));
  m.superpixels.resize(std::size_t(pairs));
  if (keep_flows) m.flows.resize(std::size_t(pairs));
  const SlicParams sp = slic_params(cfg);
  for (int k = 0; k < pairs; ++k) {
    FlowField flow = estimate_flow(clip.frames[std::size_t(k)], clip.frames[std::size_t(k) + 1]);
    m.masks[std::size_t(k)] = threshold_mask(flow_magnitude(flow), cfg.flow_threshold);
    m.superpixels[std::size_t(k)] = superpixels_for_frame(clip.frames[std::size_t(k)], m.masks[std::size_t(k)], sp);
    if (keep_flows) m.flows[std::size_t(k)] = std::move(flow);
  }
  return m;
}

SBM cuboid_sbm(const ClipMotion& motion, int t, int n) {
  if (n < 1 || t < n || t > int(motion.masks.size())) throw ContractError("cuboid_sbm: frame index out of range");
  return compute_sbm({motion.masks.begin() + (t - n), motion.masks.begin() + t});
}

std::vector<SuperpixelMap> cuboid_superpixels(const ClipMotion& motion, int t, int n) {
  if (n < 1 || t < n || t > int(motion.superpixels.size()))
    throw ContractError("cuboid_superpixels: frame index out of range");
  return {motion.superpixels.begin() + (t - n), motion.superpixels.begin() + t};
}

TrainingSet prepare_training_set(std::vector<Clip> clips, const PipelineConfig& cfg) {
  TrainingSet set;
  for (auto& clip : clips) {
    if (clip.size() < cfg.frames + 1) {
      warn("clip " + clip.id + " has " + std::to_string(clip.size()) + " frames; need " +
           std::to_string(cfg.frames + 1) + ", skipped");
      continue;
    }
    set.clips.push_back(std::move(clip));
  }
  set.motion.resize(set.clips.size());
  // Clips are independent; each worker fills its own slot.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < set.clips.size(); ++i) set.motion[i] = analyze_motion(set.clips[i], cfg);
  for (std::size_t i = 0; i < set.clips.size(); ++i)
    for (int t = cfg.frames; t < set.clips[i].size(); ++t) set.samples.push_back({int(i), t});
  return set;
}

namespace {

void shuffle(std::vector<Sample>& v, std::uint64_t seed) {
  SplitMix rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[std::size_t(rng.below(i))]);
}

void write_log_header(const std::filesystem::path& path, bool append) {
  if (path.empty()) return;
  if (append && std::filesystem::exists(path)) return;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "epoch,l_m,l_s,total\n";
}

void append_log(const std::filesystem::path& path, const EpochLog& row) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", row.epoch, row.l_m, row.l_s, row.total);
  out << buf;
  if (!out) throw IoError("cannot append to " + path.string());
}

}  // namespace

TrainResult train(const TrainingSet& data, const PipelineConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (data.samples.empty()) throw ContractError("train: no training samples");
  const ModelConfig model = ModelConfig::from(cfg);
  const LossConfig loss_cfg = LossConfig::from(cfg);
  const AdamConfig adam_cfg = AdamConfig::from(cfg);

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  if (options.resume) {
    ckpt = *options.resume;
    require_model(ckpt, model);
    if (!ckpt.adam) ckpt.adam = AdamState<float>::zeros(ckpt.params);
  } else {
    ckpt.model = model;
    ckpt.params = init_params<float>(model, cfg.seed);
    ckpt.adam = AdamState<float>::zeros(ckpt.params);
  }
  write_log_header(options.log_path, options.resume.has_value());
  if (!options.checkpoint_path.empty() && ckpt.epoch >= cfg.epochs) save_checkpoint(options.checkpoint_path, ckpt);

  const int batch = cfg.batch_size;
  std::vector<Sample> order;
  for (int epoch = ckpt.epoch; epoch < cfg.epochs; ++epoch) {
    order = data.samples;
    shuffle(order, hash_key(cfg.seed, std::uint64_t(epoch), 0x5f1ULL));
    double sum_m = 0, sum_s = 0, sum_total = 0;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(batch)) {
      const std::size_t end = std::min(order.size(), start + std::size_t(batch));
      const int n = int(end - start);
      std::vector<FrameCuboid> inputs;
      std::vector<Frame> targets;
      std::vector<MOWM> weights;
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = order[i];
        const Clip& clip = data.clips[std::size_t(s.clip)];
        const ClipMotion& motion = data.motion[std::size_t(s.clip)];
        auto [cuboid, target] = make_cuboid(clip, s.t, cfg.frames);
        if (cfg.randomsemo)
          cuboid = randomsemo(cuboid, cuboid_superpixels(motion, s.t, cfg.frames), cfg.erase_probability,
                              erasure_seed(cfg.seed, epoch, s.key()))
                       .first;
        inputs.push_back(std::move(cuboid));
        targets.push_back(std::move(target));
        weights.push_back(loss_cfg.kind == LossKind::MOLoss ? compute_mowm(cuboid_sbm(motion, s.t, cfg.frames))
                                                            : MOWM(cfg.height, cfg.width, 0.0));
      }

      Tape<float> tape;
      const Tensor5<float> out = forward(model, ckpt.params, stack_cuboids<float>(inputs), Mode::Train, &tape);
      Tensor5<float> d_out(out.batch(), out.channels(), 1, out.height(), out.width());
      LossBreakdown mean;
      for (int b = 0; b < n; ++b) {
        const auto [parts, grad] = moloss(output_image(out, b), targets[std::size_t(b)], weights[std::size_t(b)], loss_cfg);
        mean.l_m += parts.l_m / n;
        mean.l_s += parts.l_s / n;
        mean.total += parts.total / n;
        for (int c = 0; c < out.channels(); ++c) {
          float* dst = d_out.slab(b, c);
          const float* src = grad.channel(c);
          for (std::size_t i = 0; i < grad.plane_size(); ++i) dst[i] = src[i] / float(n);
        }
      }
      try {
        if (!std::isfinite(mean.total))
          throw NumericError("non-finite loss at step " + std::to_string(ckpt.step + 1));
        const ModelParams<float> grads = backward(model, ckpt.params, tape, d_out);
        adam_step(ckpt.params, grads, *ckpt.adam, adam_cfg);
      } catch (const NumericError&) {
        if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, ckpt);
        throw;
      }
      update_running_stats(model, ckpt.params, tape);
      ++ckpt.step;
      result.step_losses.push_back(mean.total);
      sum_m += mean.l_m * n;
      sum_s += mean.l_s * n;
      sum_total += mean.total * n;
    }
    ckpt.epoch = epoch + 1;
    const double count = double(order.size());
    const EpochLog row{epoch + 1, sum_m / count, sum_s / count, sum_total / count};
    result.epochs.push_back(row);
    append_log(options.log_path, row);
    if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, ckpt);
    if (options.on_epoch) options.on_epoch(row);
  }
  return result;
}

std::vector<Frame> predict_clip(const ModelConfig& model, const ModelParams<float>& params, const Clip& clip,
                                int batch_size) {
  std::vector<Frame> out;
  const int n = model.frames;
  for (int start = n; start < clip.size(); start += batch_size) {
    const int end = std::min(clip.size(), start + batch_size);
    std::vector<FrameCuboid> inputs;
    for (int t = start; t < end; ++t) inputs.push_back(make_cuboid(clip, t, n).first);
    const Tensor5<float> pred = forward(model, params, stack_cuboids<float>(inputs), Mode::Eval);
    for (int b = 0; b < end - start; ++b) out.push_back(output_image(pred, b));
  }
  return out;
}

std::optional<ScoreSeries> score_clip(const ModelConfig& model, const ModelParams<float>& params, const Clip& clip,
                                      const PipelineConfig& cfg) {
  if (clip.size() < cfg.frames + 1) {
    warn("clip " + clip.id + " is shorter than " + std::to_string(cfg.frames + 1) + " frames, not scored");
    return std::nullopt;
  }
  const std::vector<Frame> preds = predict_clip(model, params, clip, std::max(1, cfg.batch_size));
  std::vector<double> values;
  for (std::size_t i = 0; i < preds.size(); ++i)
    values.push_back(psnr(preds[i], clip.frames[std::size_t(cfg.frames) + i], cfg.psnr_linear_peak));
  return make_series(clip.id, cfg.frames, clip.size(), std::move(values));
}

std::vector<ScoreSeries> score_clips(const ModelConfig& model, const ModelParams<float>& params,
                                     const std::vector<Clip>& clips, const PipelineConfig& cfg) {
  std::vector<ScoreSeries> out;
  for (const auto& clip : clips)
    if (auto s = score_clip(model, params, clip, cfg)) out.push_back(std::move(*s));
  return out;
}

void write_motion_artifacts(const std::filesystem::path& dir, const Clip& clip, const ClipMotion& motion,
                            const PipelineConfig& cfg, bool erased) {
  std::filesystem::create_directories(dir);
  auto name = [](const char* stem, int k, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.%s", stem, k, ext);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < motion.masks.size(); ++k) {
    if (k < motion.flows.size()) write_flow(dir / name("flow", int(k), "flo"), motion.flows[k]);
    write_pgm(dir / name("mask", int(k), "pgm"), motion.masks[k]);
    write_pgm16(dir / name("superpixels", int(k), "pgm"), label_image(motion.superpixels[k]));
  }
  for (int t = cfg.frames; t < clip.size(); ++t) {
    write_pgm(dir / name("mowm", t, "pgm"), mowm_to_gray(compute_mowm(cuboid_sbm(motion, t, cfg.frames))));
    if (!erased) continue;
    const FrameCuboid cuboid = make_cuboid(clip, t, cfg.frames).first;
    const auto [out, record] = randomsemo(cuboid, cuboid_superpixels(motion, t, cfg.frames), cfg.erase_probability,
                                          erasure_seed(cfg.seed, 0, std::uint64_t(t)));
    for (int k = 0; k < cfg.frames; ++k) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "erased_%04d_%d.png", t, k);
      write_frame_png(dir / buf, out.frame(k));
    }
  }
}

}  // namespace semo
