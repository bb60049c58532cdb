#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "semo/image.hpp"
#include "semo/rng.hpp"
#include "semo/tensor.hpp"

namespace testing {

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() / ("semo_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline semo::Frame random_frame(int c, int h, int w, std::uint64_t seed) {
  semo::Frame f(c, h, w);
  semo::SplitMix rng(seed);
  for (auto& v : f.data) v = float(rng.uniform());
  return f;
}

template <typename T>
semo::Tensor5<T> random_tensor(int n, int c, int t, int h, int w, std::uint64_t seed, double lo = -1, double hi = 1) {
  semo::Tensor5<T> x(n, c, t, h, w);
  semo::SplitMix rng(seed);
  for (auto& v : x.data) v = T(rng.uniform(lo, hi));
  return x;
}

inline semo::Plane<std::uint8_t> random_mask(int h, int w, double density, std::uint64_t seed) {
  semo::Plane<std::uint8_t> m(h, w);
  semo::SplitMix rng(seed);
  for (auto& v : m.data) v = rng.uniform() < density ? 255 : 0;
  return m;
}

}  // namespace testing
