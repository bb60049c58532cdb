#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "semo/error.hpp"
#include "semo/optical_flow.hpp"

namespace semo {

static_assert(std::endian::native == std::endian::little, ".flo I/O assumes a little-endian host");

namespace {
constexpr float kFloMagic = 202021.25f;
}

FlowField load_flow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  float magic = 0.f;
  std::int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  if (in.gcount() != 4) throw LengthError("truncated .flo header in '" + path.string() + "'");
  if (magic != kFloMagic) throw FormatError("bad .flo magic in '" + path.string() + "'");
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in) throw LengthError("truncated .flo header in '" + path.string() + "'");
  if (w <= 0 || h <= 0 || w > (1 << 16) || h > (1 << 16))
    throw FormatError("implausible .flo size in '" + path.string() + "'");

  const std::size_t n = std::size_t(w) * std::size_t(h);
  std::vector<float> payload(2 * n);
  in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(payload.size() * sizeof(float)));
  if (std::size_t(in.gcount()) != payload.size() * sizeof(float))
    throw LengthError("truncated .flo payload in '" + path.string() + "'");

  FlowField flow(h, w);
  for (std::size_t i = 0; i < n; ++i) {
    flow.u.data[i] = payload[2 * i];
    flow.v.data[i] = payload[2 * i + 1];
  }
  return flow;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  if (!flow.u.same_shape(flow.v)) throw ContractError("flow components differ in size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const std::int32_t w = flow.width(), h = flow.height();
  out.write(reinterpret_cast<const char*>(&kFloMagic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> payload(2 * flow.u.size());
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    payload[2 * i] = flow.u.data[i];
    payload[2 * i + 1] = flow.v.data[i];
  }
  out.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size() * sizeof(float)));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace semo
