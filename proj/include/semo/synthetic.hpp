#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semo/image.hpp"

namespace semo {

enum class Shape { Square, Circle };

/// Desk-scale stand-in for a surveillance dataset: a fixed textured scene with objects
/// drifting at a constant speed, and test clips where one extra object moves faster.
struct SyntheticSpec {
  int height = 64;
  int width = 64;
  int objects = 2;
  double normal_speed = 2.0;        // px/frame
  double abnormal_multiplier = 3.0;
  int object_size = 10;             // square side / circle diameter, px
  std::vector<Shape> shapes{Shape::Square, Shape::Circle};
  std::uint64_t texture_seed = 7;
  int clip_length = 60;
  int train_clips = 8;
  int test_normal = 4;
  int test_abnormal = 4;
  // The abnormal object is on canvas for frames [start, start + length), as fractions of the clip.
  double abnormal_start = 0.35;
  double abnormal_length = 0.35;

  /// Throws ContractError on an inconsistent spec (e.g. multiplier 1).
  void validate() const;
};

struct SyntheticClip {
  std::string id;
  std::vector<Frame> frames;
  std::vector<std::uint8_t> labels;  // 1 while the abnormal object is on canvas
};

struct SyntheticDataset {
  std::vector<SyntheticClip> train;
  std::vector<SyntheticClip> test;
};

/// In-memory dataset. Pure function of (spec, seed).
SyntheticDataset synthesize(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes <out>/train/<clip>/frame_NNNN.png, <out>/test/<clip>/..., <out>/test_labels/<clip>.txt
/// and <out>/metadata.json.
void gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed, const std::filesystem::path& out);

}  // namespace semo
