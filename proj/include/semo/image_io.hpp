#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "semo/image.hpp"

namespace semo {

/// Decoded samples exactly as stored (interleaved), before any normalization.
struct RawImage {
  int channels = 0;
  int height = 0;
  int width = 0;
  int max_value = 255;
  std::vector<std::uint16_t> samples;
};

/// Reads PNG (8/16-bit gray, gray+alpha, RGB, RGBA) or binary PGM/PPM (P5/P6).
/// Alpha is dropped. Throws IoError naming the file on failure.
RawImage read_raw_image(const std::filesystem::path& path);

/// Reads an image as an RGB frame in [0,1]; gray is replicated to three channels.
Frame read_frame(const std::filesystem::path& path);

/// Writes planar 8-bit data (1 or 3 channels) as PNG.
void write_png(const std::filesystem::path& path, const Image<std::uint8_t>& image);

/// Quantizes a [0,1] frame to 8 bits (round to nearest) and writes PNG.
void write_frame_png(const std::filesystem::path& path, const Frame& frame);

void write_pgm(const std::filesystem::path& path, const Plane<std::uint8_t>& plane);
void write_pgm16(const std::filesystem::path& path, const Plane<std::uint16_t>& plane);

/// Reads a single-channel PGM or PNG into a plane of raw sample values.
Plane<std::uint16_t> read_gray(const std::filesystem::path& path);

}  // namespace semo
