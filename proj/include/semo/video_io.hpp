#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "semo/image.hpp"

namespace semo {

struct Clip {
  std::string id;
  std::vector<Frame> frames;
  std::vector<std::filesystem::path> source_paths;

  int size() const noexcept { return int(frames.size()); }
};

/// Stack of consecutive frames fed to the model, stored as [channel][time][y][x].
struct FrameCuboid {
  int channels = 3;
  int frames = 0;
  int height = 0;
  int width = 0;
  int t_index = 0;  // index of the frame being predicted
  std::vector<float> data;

  FrameCuboid() = default;
  FrameCuboid(int c, int t, int h, int w)
      : channels(c), frames(t), height(h), width(w), data(std::size_t(c) * t * h * w, 0.f) {}

  std::size_t plane_size() const noexcept { return std::size_t(height) * width; }
  float& at(int c, int t, int y, int x) {
    return data[((std::size_t(c) * frames + t) * height + y) * width + x];
  }
  float at(int c, int t, int y, int x) const {
    return data[((std::size_t(c) * frames + t) * height + y) * width + x];
  }
  Frame frame(int t) const;
  void set_frame(int t, const Frame& f);
  bool operator==(const FrameCuboid&) const = default;
};

struct ClipLabels {
  std::string clip_id;
  std::vector<std::uint8_t> labels;  // 1 = abnormal
};

/// Image files of a directory (PNG/PGM/PPM) in lexicographic filename order.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

/// Decodes every frame of `dir`, bilinear-resized to height×width and scaled to [0,1].
/// Throws IoError naming the file on decode failure, ContractError on an empty directory.
Clip load_clip(const std::filesystem::path& dir, int height, int width);

/// Loads every immediate subdirectory of `root` as a clip, in lexicographic order.
std::vector<Clip> load_clips(const std::filesystem::path& root, int height, int width);

/// Returns (frames t-n..t-1 stacked, frame t). Requires n <= t <= clip.size()-1.
std::pair<FrameCuboid, Frame> make_cuboid(const Clip& clip, int t, int n);

/// One 0/1 flag per line. Blank trailing lines are ignored.
ClipLabels load_labels(const std::filesystem::path& path);
ClipLabels parse_labels(const std::string& text, std::string clip_id = {});

}  // namespace semo
