// semo: RandomSEMO / MOLoss video anomaly detection pipeline.
//
//   semo synth      --out DATA [--seed S]
//   semo preprocess --config C --input CLIPS --out DIR [--dump-erased]
//   semo train      --config C --input CLIPS --out DIR [--checkpoint RESUME]
//   semo score      --config C --checkpoint CKPT --input CLIPS --out scores.csv
//   semo eval       --scores scores.csv --labels LABELS --out roc.csv [--skip N]
//   semo viz        --pred P.png --target T.png --out diff.png
//
// Exit codes: 0 ok, 1 numeric failure, 2 bad config or input, 3 model mismatch, 4 evaluation mismatch.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "semo/checkpoint.hpp"
#include "semo/config.hpp"
#include "semo/error.hpp"
#include "semo/image_io.hpp"
#include "semo/log.hpp"
#include "semo/parallel.hpp"
#include "semo/pipeline.hpp"
#include "semo/scoring.hpp"
#include "semo/synthetic.hpp"

namespace fs = std::filesystem;
using namespace semo;

namespace {

enum Exit { kOk = 0, kNumeric = 1, kInput = 2, kModel = 3, kEval = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> epochs;
  std::optional<double> tsp;
  std::optional<double> flow_threshold;
  std::string checkpoint;
  std::string out;
  std::string input;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--threads", c.threads, "worker threads (1 = reproducible)");
  cmd->add_option("--epochs", c.epochs, "training epochs");
  cmd->add_option("--tsp", c.tsp, "superpixel erase probability");
  cmd->add_option("--flow-threshold", c.flow_threshold, "flow magnitude threshold, px/frame");
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.epochs) cfg.epochs = *c.epochs;
  if (c.tsp) cfg.erase_probability = *c.tsp;
  if (c.flow_threshold) cfg.flow_threshold = *c.flow_threshold;
  cfg.validate();
  set_threads(cfg.threads);
  return cfg;
}

// A directory of frames is one clip; a directory of directories is a clip set.
std::vector<Clip> load_input(const std::string& input, const PipelineConfig& cfg) {
  if (input.empty()) throw ContractError("--input is required");
  if (!fs::is_directory(input)) throw IoError("input directory not found: " + input);
  if (!list_frame_files(input).empty()) return {load_clip(input, cfg.height, cfg.width)};
  auto clips = load_clips(input, cfg.height, cfg.width);
  if (clips.empty()) throw ContractError("no clips under " + input);
  return clips;
}

int cmd_synth(const std::string& out, std::uint64_t seed, const SyntheticSpec& spec) {
  gen_synthetic(spec, seed, out);
  std::printf("wrote %d train and %d test clips to %s\n", spec.train_clips, spec.test_normal + spec.test_abnormal,
              out.c_str());
  return kOk;
}

int cmd_preprocess(const Common& c, bool dump_erased) {
  const PipelineConfig cfg = resolve(c);
  if (c.out.empty()) throw ContractError("--out is required");
  for (const Clip& clip : load_input(c.input, cfg)) {
    const ClipMotion motion = analyze_motion(clip, cfg, true);
    write_motion_artifacts(fs::path(c.out) / clip.id, clip, motion, cfg, dump_erased);
    std::printf("%s: %zu masks\n", clip.id.c_str(), motion.masks.size());
  }
  return kOk;
}

int cmd_train(const Common& c) {
  const PipelineConfig cfg = resolve(c);
  if (c.out.empty()) throw ContractError("--out is required");
  TrainOptions opts;
  opts.checkpoint_path = fs::path(c.out) / "checkpoint.bin";
  opts.log_path = fs::path(c.out) / "train_log.csv";
  if (!c.checkpoint.empty()) opts.resume = load_checkpoint(c.checkpoint);
  opts.on_epoch = [](const EpochLog& e) {
    std::printf("epoch %d  l_m %.6f  l_s %.6f  total %.6f\n", e.epoch, e.l_m, e.l_s, e.total);
    std::fflush(stdout);
  };
  fs::create_directories(c.out);
  {
    std::ofstream used(fs::path(c.out) / "config.json", std::ios::binary);
    used << config_to_json_text(cfg) << '\n';
  }
  const TrainingSet data = prepare_training_set(load_input(c.input, cfg), cfg);
  const TrainResult r = train(data, cfg, opts);
  std::printf("trained to step %lld, checkpoint %s\n", static_cast<long long>(r.checkpoint.step),
              opts.checkpoint_path.c_str());
  return kOk;
}

int cmd_score(const Common& c) {
  const PipelineConfig cfg = resolve(c);
  if (c.checkpoint.empty()) throw ContractError("--checkpoint is required");
  if (c.out.empty()) throw ContractError("--out is required");
  const Checkpoint ckpt = load_checkpoint(c.checkpoint);
  const ModelConfig model = ModelConfig::from(cfg);
  require_model(ckpt, model);
  const auto series = score_clips(model, ckpt.params, load_input(c.input, cfg), cfg);
  write_scores_csv(fs::path(c.out), series);
  std::printf("scored %zu clips -> %s\n", series.size(), c.out.c_str());
  return kOk;
}

int cmd_eval(const std::string& scores, const std::string& labels_dir, const std::string& out, int skip) {
  const auto series = read_scores_csv(fs::path(scores));
  std::vector<ClipLabels> labels;
  for (const auto& s : series) {
    const fs::path p = fs::path(labels_dir) / (s.clip_id + ".txt");
    if (!fs::exists(p)) throw EvalMismatchError("no label file for clip " + s.clip_id);
    ClipLabels l = load_labels(p);
    l.clip_id = s.clip_id;
    labels.push_back(std::move(l));
  }
  int use_skip = skip;
  if (use_skip < 0) {
    use_skip = 0;
    for (const auto& s : series) use_skip = std::max(use_skip, s.skip_prefix);
  }
  const RocResult roc = frame_auc(series, labels, use_skip);
  if (!out.empty()) write_roc_csv(fs::path(out), roc);
  std::printf("auc %.6f  positives %zu  negatives %zu\n", roc.auc, roc.positives, roc.negatives);
  return kOk;
}

int cmd_viz(const std::string& pred, const std::string& target, const std::string& out) {
  const Frame p = read_frame(pred);
  const Frame t = read_frame(target);
  if (!p.same_shape(t)) throw ContractError("prediction and target sizes differ");
  write_png(out, difference_map(p, t));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RandomSEMO + MOLoss video anomaly detection"};
  app.require_subcommand(1);

  Common common;
  bool dump_erased = false;
  std::uint64_t synth_seed = 0;
  SyntheticSpec spec;
  std::string scores, labels, pred, target;
  int skip = -1;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", common.out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "dataset seed");
  synth->add_option("--height", spec.height);
  synth->add_option("--width", spec.width);
  synth->add_option("--clip-length", spec.clip_length);
  synth->add_option("--train-clips", spec.train_clips);
  synth->add_option("--test-normal", spec.test_normal);
  synth->add_option("--test-abnormal", spec.test_abnormal);
  synth->add_option("--speed", spec.normal_speed, "normal speed, px/frame");
  synth->add_option("--multiplier", spec.abnormal_multiplier, "abnormal speed multiplier");

  auto* pre = app.add_subcommand("preprocess", "write flows, masks, superpixels and weight maps");
  add_common(pre, common);
  pre->add_option("--input", common.input, "clip directory or directory of clips")->required();
  pre->add_option("--out", common.out, "output directory")->required();
  pre->add_flag("--dump-erased", dump_erased, "also write RandomSEMO outputs");

  auto* tr = app.add_subcommand("train", "train the frame predictor");
  add_common(tr, common);
  tr->add_option("--input", common.input, "directory of training clips")->required();
  tr->add_option("--out", common.out, "output directory")->required();
  tr->add_option("--checkpoint", common.checkpoint, "resume from this checkpoint");

  auto* sc = app.add_subcommand("score", "per-frame PSNR and normality scores");
  add_common(sc, common);
  sc->add_option("--input", common.input, "directory of test clips")->required();
  sc->add_option("--checkpoint", common.checkpoint, "trained checkpoint")->required();
  sc->add_option("--out", common.out, "scores CSV")->required();

  auto* ev = app.add_subcommand("eval", "frame-level ROC-AUC");
  ev->add_option("--scores", scores, "scores CSV")->required();
  ev->add_option("--labels", labels, "directory of <clip>.txt label files")->required();
  ev->add_option("--out", common.out, "ROC CSV");
  ev->add_option("--skip", skip, "leading frames to ignore per clip (default: first scored frame)");

  auto* viz = app.add_subcommand("viz", "difference map between prediction and ground truth");
  viz->add_option("--pred", pred)->required();
  viz->add_option("--target", target)->required();
  viz->add_option("--out", common.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*synth) return cmd_synth(common.out, synth_seed, spec);
    if (*pre) return cmd_preprocess(common, dump_erased);
    if (*tr) return cmd_train(common);
    if (*sc) return cmd_score(common);
    if (*ev) return cmd_eval(scores, labels, common.out, skip);
    if (*viz) return cmd_viz(pred, target, common.out);
  } catch (const ModelMismatchError& e) {
    std::cerr << "model mismatch: " << e.what() << '\n';
    return kModel;
  } catch (const EvalMismatchError& e) {
    std::cerr << "evaluation mismatch: " << e.what() << '\n';
    return kEval;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}
