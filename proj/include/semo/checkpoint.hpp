#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "semo/adam.hpp"
#include "semo/autoencoder.hpp"

namespace semo {

/// Model dimensions do not match what the caller expects.
class ModelMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig model;
  ModelParams<float> params;
  std::optional<AdamState<float>> adam;
  std::int64_t step = 0;
  int epoch = 0;  // completed epochs
};

// Layout: "SEMOCKPT", u32 version, i32 model dims, i64 step, i32 epoch, u32 tensor count,
// then per tensor (u32 name length, name, u64 element count, f32 values), then a u8 flag and,
// if set, Adam m and v for the trainable tensors in the same order. All little-endian.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws ModelMismatchError unless the stored architecture equals `expected`.
void require_model(const Checkpoint& ckpt, const ModelConfig& expected);

}  // namespace semo
