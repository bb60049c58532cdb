#include "semo/video_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "semo/error.hpp"
#include "semo/image_io.hpp"

namespace semo {

Frame FrameCuboid::frame(int t) const {
  if (t < 0 || t >= frames) throw ContractError("cuboid frame index out of range");
  Frame f(channels, height, width);
  for (int c = 0; c < channels; ++c)
    std::copy_n(data.begin() + std::ptrdiff_t((std::size_t(c) * frames + t) * plane_size()), plane_size(),
                f.channel(c));
  return f;
}

void FrameCuboid::set_frame(int t, const Frame& f) {
  if (t < 0 || t >= frames) throw ContractError("cuboid frame index out of range");
  if (f.channels != channels || f.height != height || f.width != width)
    throw ContractError("frame does not match cuboid shape");
  for (int c = 0; c < channels; ++c)
    std::copy_n(f.channel(c), plane_size(),
                data.begin() + std::ptrdiff_t((std::size_t(c) * frames + t) * plane_size()));
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return char(std::tolower(ch)); });
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

Clip load_clip(const std::filesystem::path& dir, int height, int width) {
  Clip clip;
  clip.id = dir.filename().string();
  clip.source_paths = list_frame_files(dir);
  if (clip.source_paths.empty()) throw ContractError("empty clip: no frames in '" + dir.string() + "'");
  clip.frames.reserve(clip.source_paths.size());
  for (const auto& path : clip.source_paths) clip.frames.push_back(resize_bilinear(read_frame(path), height, width));
  return clip;
}

std::vector<Clip> load_clips(const std::filesystem::path& root, int height, int width) {
  if (!std::filesystem::is_directory(root)) throw IoError("not a directory: '" + root.string() + "'");
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<Clip> clips;
  for (const auto& d : dirs) clips.push_back(load_clip(d, height, width));
  return clips;
}

std::pair<FrameCuboid, Frame> make_cuboid(const Clip& clip, int t, int n) {
  if (n < 1) throw ContractError("cuboid needs at least one frame");
  if (t < n || t > clip.size() - 1)
    throw ContractError("target index " + std::to_string(t) + " out of range for " + std::to_string(n) +
                        " input frames and a clip of " + std::to_string(clip.size()));
  const Frame& first = clip.frames[std::size_t(t - n)];
  FrameCuboid cuboid(first.channels, n, first.height, first.width);
  cuboid.t_index = t;
  for (int k = 0; k < n; ++k) cuboid.set_frame(k, clip.frames[std::size_t(t - n + k)]);
  return {std::move(cuboid), clip.frames[std::size_t(t)]};
}

ClipLabels parse_labels(const std::string& text, std::string clip_id) {
  ClipLabels out;
  out.clip_id = std::move(clip_id);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) lines.pop_back();
  for (const auto& raw : lines) {
    ++line_no;
    const auto b = raw.find_first_not_of(" \t\r");
    const auto e = raw.find_last_not_of(" \t\r");
    const std::string tok = b == std::string::npos ? std::string() : raw.substr(b, e - b + 1);
    if (tok == "0") out.labels.push_back(0);
    else if (tok == "1") out.labels.push_back(1);
    else throw ParseError("label must be 0 or 1, got '" + tok + "'", line_no);
  }
  return out;
}

ClipLabels load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_labels(ss.str(), path.stem().string());
}

}  // namespace semo
