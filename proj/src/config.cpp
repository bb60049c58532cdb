#include "semo/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "semo/error.hpp"

namespace semo {

using nlohmann::json;

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MOLoss: return "moloss";
    case LossKind::L1: return "l1";
    case LossKind::SSIM: return "ssim";
    case LossKind::L1PlusSSIM: return "l1_ssim";
  }
  return "moloss";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "moloss") return LossKind::MOLoss;
  if (name == "l1") return LossKind::L1;
  if (name == "ssim") return LossKind::SSIM;
  if (name == "l1_ssim") return LossKind::L1PlusSSIM;
  throw ConfigError("loss", "unknown loss '" + name + "' (moloss, l1, ssim, l1_ssim)");
}

void PipelineConfig::validate() const {
  if (frames < 2) throw ConfigError("frames", "must be >= 2");
  if (height < 8 || width < 8) throw ConfigError(height < 8 ? "height" : "width", "must be >= 8");
  if (max_superpixels < 1) throw ConfigError("max_superpixels", "must be >= 1");
  if (!(erase_probability >= 0.0 && erase_probability <= 1.0))
    throw ConfigError("erase_probability", "must lie in [0,1]");
  if (!(flow_threshold >= 0.0)) throw ConfigError("flow_threshold", "must be >= 0");
  if (!(slic_compactness > 0.0)) throw ConfigError("slic_compactness", "must be > 0");
  if (slic_iterations < 0) throw ConfigError("slic_iterations", "must be >= 0");
  if (!(eta > 0.0)) throw ConfigError("eta", "must be > 0");
  if (weight_l1 < 0.0) throw ConfigError("weight_l1", "must be >= 0");
  if (weight_ssim < 0.0) throw ConfigError("weight_ssim", "must be >= 0");
  if (!(weight_l1 + weight_ssim > 0.0)) throw ConfigError("weight_l1", "weight_l1 + weight_ssim must be > 0");
  for (int c : channels)
    if (c < 1) throw ConfigError("channels", "widths must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "must lie in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2", "must lie in [0,1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon", "must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (epochs < 0) throw ConfigError("epochs", "must be >= 0");
}

namespace {

template <typename T>
void read_into(const json& j, const std::string& key, T& out) {
  try {
    out = j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text, PipelineConfig cfg) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<file>", "top level must be an object");

  for (const auto& [key, value] : doc.items()) {
    if (key == "frames") read_into(value, key, cfg.frames);
    else if (key == "height") read_into(value, key, cfg.height);
    else if (key == "width") read_into(value, key, cfg.width);
    else if (key == "max_superpixels") read_into(value, key, cfg.max_superpixels);
    else if (key == "erase_probability") read_into(value, key, cfg.erase_probability);
    else if (key == "flow_threshold") read_into(value, key, cfg.flow_threshold);
    else if (key == "slic_compactness") read_into(value, key, cfg.slic_compactness);
    else if (key == "slic_iterations") read_into(value, key, cfg.slic_iterations);
    else if (key == "randomsemo") read_into(value, key, cfg.randomsemo);
    else if (key == "loss") {
      std::string name;
      read_into(value, key, name);
      cfg.loss = loss_kind_from_string(name);
    }
    else if (key == "eta") read_into(value, key, cfg.eta);
    else if (key == "weight_l1") read_into(value, key, cfg.weight_l1);
    else if (key == "weight_ssim") read_into(value, key, cfg.weight_ssim);
    else if (key == "ssim_product_denominator") read_into(value, key, cfg.ssim_product_denominator);
    else if (key == "psnr_linear_peak") read_into(value, key, cfg.psnr_linear_peak);
    else if (key == "channels") read_into(value, key, cfg.channels);
    else if (key == "learning_rate") read_into(value, key, cfg.learning_rate);
    else if (key == "beta1") read_into(value, key, cfg.beta1);
    else if (key == "beta2") read_into(value, key, cfg.beta2);
    else if (key == "adam_epsilon") read_into(value, key, cfg.adam_epsilon);
    else if (key == "batch_size") read_into(value, key, cfg.batch_size);
    else if (key == "epochs") read_into(value, key, cfg.epochs);
    else if (key == "seed") read_into(value, key, cfg.seed);
    else if (key == "threads") read_into(value, key, cfg.threads);
    else throw ConfigError(key, "unknown key");
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str(), base);
}

std::string config_to_json_text(const PipelineConfig& c) {
  json j = {
      {"frames", c.frames},
      {"height", c.height},
      {"width", c.width},
      {"max_superpixels", c.max_superpixels},
      {"erase_probability", c.erase_probability},
      {"flow_threshold", c.flow_threshold},
      {"slic_compactness", c.slic_compactness},
      {"slic_iterations", c.slic_iterations},
      {"randomsemo", c.randomsemo},
      {"loss", to_string(c.loss)},
      {"eta", c.eta},
      {"weight_l1", c.weight_l1},
      {"weight_ssim", c.weight_ssim},
      {"ssim_product_denominator", c.ssim_product_denominator},
      {"psnr_linear_peak", c.psnr_linear_peak},
      {"channels", c.channels},
      {"learning_rate", c.learning_rate},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"adam_epsilon", c.adam_epsilon},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"threads", c.threads},
  };
  return j.dump(2) + "\n";
}

PipelineConfig desk_scale_config() {
  PipelineConfig c;
  c.frames = 3;
  c.height = 64;
  c.width = 64;
  c.channels = {8, 16, 32};
  c.batch_size = 8;
  c.epochs = 10;
  c.learning_rate = 1e-3;
  return c;
}

}  // namespace semo
