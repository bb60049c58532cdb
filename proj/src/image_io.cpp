#include "semo/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace semo {
namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

RawImage read_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed for '" + path.string() + "'");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed for '" + path.string() + "'");
  }
  RawImage raw;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot decode PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
  png_read_update_info(png, info);

  raw.width = int(png_get_image_width(png, info));
  raw.height = int(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int keep = (channels >= 3) ? 3 : 1;
  raw.channels = keep;
  raw.max_value = out_depth == 16 ? 65535 : 255;
  raw.samples.resize(std::size_t(raw.width) * raw.height * keep);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < keep; ++c) {
        const std::size_t src = std::size_t(x) * channels + c;
        std::uint16_t v;
        if (out_depth == 16) {
          v = reinterpret_cast<const std::uint16_t*>(rows[y])[src];
        } else {
          v = rows[y][src];
        }
        raw.samples[(std::size_t(y) * raw.width + x) * keep + c] = v;
      }
    }
  }
  return raw;
}

RawImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  auto token = [&]() {
    std::string t;
    char ch;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(ch);
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P6") throw IoError("unsupported PNM type in '" + path.string() + "'");
  RawImage raw;
  try {
    raw.width = std::stoi(token());
    raw.height = std::stoi(token());
    raw.max_value = std::stoi(token());
  } catch (const std::exception&) {
    throw IoError("malformed PNM header in '" + path.string() + "'");
  }
  if (raw.width <= 0 || raw.height <= 0 || raw.max_value <= 0 || raw.max_value > 65535)
    throw IoError("malformed PNM header in '" + path.string() + "'");
  raw.channels = magic == "P6" ? 3 : 1;
  const std::size_t count = std::size_t(raw.width) * raw.height * raw.channels;
  const int bytes = raw.max_value > 255 ? 2 : 1;
  std::vector<unsigned char> payload(count * bytes);
  in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(payload.size()));
  if (std::size_t(in.gcount()) != payload.size()) throw IoError("truncated PNM '" + path.string() + "'");
  raw.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    raw.samples[i] = bytes == 2 ? std::uint16_t(payload[2 * i] << 8 | payload[2 * i + 1]) : payload[i];
  }
  return raw;
}

void write_bytes(const std::filesystem::path& path, const std::string& header,
                 const std::vector<unsigned char>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

RawImage read_raw_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open '" + path.string() + "'");
  return has_png_signature(path) ? read_png(path) : read_pnm(path);
}

Frame read_frame(const std::filesystem::path& path) {
  const RawImage raw = read_raw_image(path);
  Frame frame(3, raw.height, raw.width);
  const float scale = float(raw.max_value);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t base = (std::size_t(y) * raw.width + x) * raw.channels;
      for (int c = 0; c < 3; ++c) {
        const int src = raw.channels == 3 ? c : 0;
        frame(c, y, x) = float(raw.samples[base + src]) / scale;
      }
    }
  }
  return frame;
}

void write_png(const std::filesystem::path& path, const Image<std::uint8_t>& image) {
  if (image.channels != 1 && image.channels != 3) throw ContractError("write_png expects 1 or 3 channels");
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed for '" + path.string() + "'");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed for '" + path.string() + "'");
  }
  std::vector<unsigned char> interleaved(image.size());
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c)
        interleaved[(std::size_t(y) * image.width + x) * image.channels + c] = image(c, y, x);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = interleaved.data() + std::size_t(y) * image.width * image.channels;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("cannot encode PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_frame_png(const std::filesystem::path& path, const Frame& frame) {
  Image<std::uint8_t> img(frame.channels, frame.height, frame.width);
  for (std::size_t i = 0; i < frame.size(); ++i)
    img.data[i] = std::uint8_t(std::lround(std::clamp(frame.data[i], 0.f, 1.f) * 255.f));
  write_png(path, img);
}

void write_pgm(const std::filesystem::path& path, const Plane<std::uint8_t>& plane) {
  write_bytes(path, "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n255\n",
              plane.data);
}

void write_pgm16(const std::filesystem::path& path, const Plane<std::uint16_t>& plane) {
  std::vector<unsigned char> payload(plane.size() * 2);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    payload[2 * i] = static_cast<unsigned char>(plane.data[i] >> 8);
    payload[2 * i + 1] = static_cast<unsigned char>(plane.data[i] & 0xff);
  }
  write_bytes(path, "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n65535\n",
              payload);
}

Plane<std::uint16_t> read_gray(const std::filesystem::path& path) {
  const RawImage raw = read_raw_image(path);
  if (raw.channels != 1) throw IoError("expected a single-channel image in '" + path.string() + "'");
  Plane<std::uint16_t> out(raw.height, raw.width);
  out.data = raw.samples;
  return out;
}

}  // namespace semo
