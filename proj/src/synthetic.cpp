#include "semo/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "semo/error.hpp"
#include "semo/image_io.hpp"
#include "semo/rng.hpp"

namespace semo {

void SyntheticSpec::validate() const {
  if (height < 16 || width < 16) throw ContractError("synthetic: canvas must be at least 16x16");
  if (objects < 0) throw ContractError("synthetic: negative object count");
  if (!(normal_speed > 0)) throw ContractError("synthetic: normal speed must be positive");
  if (!(abnormal_multiplier > 0) || abnormal_multiplier == 1.0)
    throw ContractError("synthetic: abnormal multiplier must be positive and differ from 1");
  if (object_size < 2 || object_size * 2 > std::min(height, width))
    throw ContractError("synthetic: object size does not fit the canvas");
  if (shapes.empty()) throw ContractError("synthetic: no shapes");
  if (clip_length < 2) throw ContractError("synthetic: clips need at least two frames");
  if (train_clips < 0 || test_normal < 0 || test_abnormal < 0) throw ContractError("synthetic: negative clip count");
  if (!(abnormal_start >= 0 && abnormal_length > 0 && abnormal_start + abnormal_length <= 1.0))
    throw ContractError("synthetic: abnormal interval must lie inside the clip");
}

namespace {

struct Mover {
  Shape shape;
  double y, x, vy, vx;
  float rgb[3];
  int first = 0, last = 0;  // visible on [first, last)
};

Frame make_background(const SyntheticSpec& spec) {
  SplitMix rng(hash_key(spec.texture_seed, 0xb6ULL));
  Frame bg(3, spec.height, spec.width);
  struct Wave {
    double fy, fx, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 6; ++i)
    waves.push_back({rng.uniform(0.05, 0.45), rng.uniform(0.05, 0.45), rng.uniform(0, 2 * std::numbers::pi),
                     rng.uniform(0.03, 0.08)});
  const double tint[3] = {rng.uniform(0.35, 0.55), rng.uniform(0.35, 0.55), rng.uniform(0.35, 0.55)};
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      double v = 0;
      for (const auto& w : waves) v += w.amp * std::sin(w.fy * y + w.fx * x + w.phase);
      const double grain = rng.uniform(-0.03, 0.03);
      for (int c = 0; c < 3; ++c) bg(c, y, x) = float(std::clamp(tint[c] + v + grain, 0.0, 1.0));
    }
  return bg;
}

Mover spawn(const SyntheticSpec& spec, SplitMix& rng, double speed) {
  Mover m;
  m.shape = spec.shapes[rng.below(spec.shapes.size())];
  const double r = spec.object_size / 2.0;
  m.y = rng.uniform(r, spec.height - r);
  m.x = rng.uniform(r, spec.width - r);
  const double angle = rng.uniform(0, 2 * std::numbers::pi);
  m.vy = speed * std::sin(angle);
  m.vx = speed * std::cos(angle);
  // Saturated colors that stand out from the mid-gray scene.
  const int hot = int(rng.below(3));
  for (int c = 0; c < 3; ++c) m.rgb[c] = float(c == hot ? rng.uniform(0.85, 1.0) : rng.uniform(0.0, 0.2));
  return m;
}

void step(Mover& m, const SyntheticSpec& spec) {
  const double r = spec.object_size / 2.0;
  m.y += m.vy;
  m.x += m.vx;
  auto bounce = [r](double& p, double& v, double extent) {
    if (p < r) {
      p = 2 * r - p;
      v = -v;
    } else if (p > extent - r) {
      p = 2 * (extent - r) - p;
      v = -v;
    }
  };
  bounce(m.y, m.vy, spec.height);
  bounce(m.x, m.vx, spec.width);
}

void draw(Frame& f, const Mover& m, const SyntheticSpec& spec) {
  const double r = spec.object_size / 2.0;
  const int y0 = std::max(0, int(std::floor(m.y - r))), y1 = std::min(f.height - 1, int(std::ceil(m.y + r)));
  const int x0 = std::max(0, int(std::floor(m.x - r))), x1 = std::min(f.width - 1, int(std::ceil(m.x + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dy = y + 0.5 - m.y, dx = x + 0.5 - m.x;
      const bool inside = m.shape == Shape::Square ? (std::abs(dy) <= r && std::abs(dx) <= r) : (dy * dy + dx * dx <= r * r);
      if (!inside) continue;
      for (int c = 0; c < 3; ++c) f(c, y, x) = m.rgb[c];
    }
}

SyntheticClip render(const SyntheticSpec& spec, const Frame& bg, std::uint64_t key, bool abnormal, std::string id) {
  SplitMix rng(key);
  std::vector<Mover> movers;
  for (int i = 0; i < spec.objects; ++i) {
    movers.push_back(spawn(spec, rng, spec.normal_speed));
    movers.back().last = spec.clip_length;
  }
  if (abnormal) {
    Mover fast = spawn(spec, rng, spec.normal_speed * spec.abnormal_multiplier);
    fast.first = int(std::lround(spec.abnormal_start * spec.clip_length));
    fast.last = std::min(spec.clip_length, fast.first + std::max(1, int(std::lround(spec.abnormal_length * spec.clip_length))));
    movers.push_back(fast);
  }
  SyntheticClip clip;
  clip.id = std::move(id);
  for (int t = 0; t < spec.clip_length; ++t) {
    Frame f = bg;
    bool anomaly = false;
    for (const auto& m : movers)
      if (t >= m.first && t < m.last) {
        draw(f, m, spec);
        anomaly |= abnormal && &m == &movers.back();
      }
    clip.frames.push_back(std::move(f));
    clip.labels.push_back(anomaly ? 1 : 0);
    for (auto& m : movers)
      if (t >= m.first) step(m, spec);
  }
  return clip;
}

std::string clip_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "clip_%02d", i);
  return buf;
}

}  // namespace

SyntheticDataset synthesize(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Frame bg = make_background(spec);
  SyntheticDataset ds;
  for (int i = 0; i < spec.train_clips; ++i)
    ds.train.push_back(render(spec, bg, hash_key(seed, 1, std::uint64_t(i)), false, clip_name(i)));
  // Normal and abnormal test clips interleave so neither class sits at one end of the listing.
  int normal = 0, abnormal = 0;
  for (int i = 0; i < spec.test_normal + spec.test_abnormal; ++i) {
    const bool is_abnormal = abnormal < spec.test_abnormal && (normal >= spec.test_normal || i % 2 == 1);
    (is_abnormal ? abnormal : normal) += 1;
    ds.test.push_back(render(spec, bg, hash_key(seed, 2, std::uint64_t(i)), is_abnormal, clip_name(i)));
  }
  return ds;
}

void gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed, const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  const SyntheticDataset ds = synthesize(spec, seed);
  auto write_clip = [](const fs::path& dir, const SyntheticClip& clip) {
    fs::create_directories(dir);
    for (std::size_t t = 0; t < clip.frames.size(); ++t) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.png", t);
      write_frame_png(dir / name, clip.frames[t]);
    }
  };
  nlohmann::ordered_json meta;
  meta["height"] = spec.height;
  meta["width"] = spec.width;
  meta["clip_length"] = spec.clip_length;
  meta["normal_speed"] = spec.normal_speed;
  meta["abnormal_multiplier"] = spec.abnormal_multiplier;
  meta["seed"] = seed;
  meta["texture_seed"] = spec.texture_seed;
  meta["train"] = nlohmann::ordered_json::array();
  meta["test"] = nlohmann::ordered_json::array();
  for (const auto& c : ds.train) {
    write_clip(out / "train" / c.id, c);
    meta["train"].push_back(c.id);
  }
  fs::create_directories(out / "test_labels");
  for (const auto& c : ds.test) {
    write_clip(out / "test" / c.id, c);
    std::ofstream labels(out / "test_labels" / (c.id + ".txt"), std::ios::binary);
    for (auto l : c.labels) labels << int(l) << '\n';
    if (!labels) throw IoError("cannot write labels for " + c.id);
    bool abnormal = false;
    for (auto l : c.labels) abnormal |= l != 0;
    meta["test"].push_back({{"id", c.id}, {"abnormal", abnormal}});
  }
  std::ofstream m(out / "metadata.json", std::ios::binary);
  m << meta.dump(2) << '\n';
  if (!m) throw IoError("cannot write " + (out / "metadata.json").string());
}

}  // namespace semo
