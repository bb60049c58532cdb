#include "semo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "semo/error.hpp"

namespace semo {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'O', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }
  template <typename V>
  void put(V v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), std::streamsize(n)); }
  void tensor(const std::string& name, const std::vector<float>& values) {
    put(std::uint32_t(name.size()));
    bytes(name.data(), name.size());
    put(std::uint64_t(values.size()));
    bytes(values.data(), values.size() * sizeof(float));
  }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), std::streamsize(n));
    if (std::size_t(in_.gcount()) != n) throw LengthError("checkpoint truncated: " + path_.string());
  }
  template <typename V>
  V get() {
    V v;
    bytes(&v, sizeof v);
    return v;
  }
  void tensor(const std::string& expected_name, std::vector<float>& values) {
    const auto len = get<std::uint32_t>();
    if (len > 4096) throw FormatError("checkpoint: implausible tensor name length");
    std::string name(len, '\0');
    bytes(name.data(), len);
    if (name != expected_name)
      throw FormatError("checkpoint: expected tensor " + expected_name + ", found " + name);
    const auto count = get<std::uint64_t>();
    if (count > (std::uint64_t(1) << 34)) throw FormatError("checkpoint: implausible size for " + name);
    values.resize(count);
    bytes(values.data(), count * sizeof(float));
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

void put_model(Writer& w, const ModelConfig& m) {
  for (int v : {m.in_channels, m.out_channels, m.frames, m.height, m.width, m.channels[0], m.channels[1],
                m.channels[2], m.aspp_rates[0], m.aspp_rates[1], m.aspp_rates[2]})
    w.put(std::int32_t(v));
  w.put(m.leaky_slope);
  w.put(m.bn_eps);
  w.put(m.bn_momentum);
}

ModelConfig get_model(Reader& r) {
  ModelConfig m;
  for (int* v : {&m.in_channels, &m.out_channels, &m.frames, &m.height, &m.width, &m.channels[0], &m.channels[1],
                 &m.channels[2], &m.aspp_rates[0], &m.aspp_rates[1], &m.aspp_rates[2]})
    *v = r.get<std::int32_t>();
  m.leaky_slope = r.get<double>();
  m.bn_eps = r.get<double>();
  m.bn_momentum = r.get<double>();
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.put(kVersion);
  put_model(w, ckpt.model);
  w.put(std::int64_t(ckpt.step));
  w.put(std::int32_t(ckpt.epoch));
  const auto entries = ckpt.params.entries();
  w.put(std::uint32_t(entries.size()));
  for (const auto& e : entries) w.tensor(e.name, *e.values);
  w.put(std::uint8_t(ckpt.adam ? 1 : 0));
  if (ckpt.adam) {
    w.put(std::int64_t(ckpt.adam->step));
    for (const auto* moments : {&ckpt.adam->m, &ckpt.adam->v})
      for (const auto& e : moments->entries())
        if (e.trainable) w.tensor(e.name, *e.values);
  }
  w.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw FormatError("not a checkpoint: " + path.string());
  if (const auto version = r.get<std::uint32_t>(); version != kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.model = get_model(r);
  ckpt.step = r.get<std::int64_t>();
  ckpt.epoch = r.get<std::int32_t>();
  auto entries = ckpt.params.entries();
  if (r.get<std::uint32_t>() != entries.size()) throw FormatError("checkpoint: unexpected tensor count");
  for (auto& e : entries) r.tensor(e.name, *e.values);
  if (r.get<std::uint8_t>()) {
    AdamState<float> adam{zeros_like(ckpt.params), zeros_like(ckpt.params), r.get<std::int64_t>()};
    for (auto* moments : {&adam.m, &adam.v})
      for (auto& e : moments->entries())
        if (e.trainable) r.tensor(e.name, *e.values);
    ckpt.adam = std::move(adam);
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");

  // Shapes must agree with the architecture the header describes.
  const ModelParams<float> ref = init_params<float>(ckpt.model, 0);
  const auto want = ref.entries();
  const auto got = ckpt.params.entries();
  for (std::size_t i = 0; i < want.size(); ++i)
    if (want[i].values->size() != got[i].values->size())
      throw FormatError("checkpoint: tensor " + got[i].name + " has the wrong size");
  return ckpt;
}

void require_model(const Checkpoint& ckpt, const ModelConfig& expected) {
  const ModelConfig& m = ckpt.model;
  auto dims = [](const ModelConfig& c) {
    return std::to_string(c.frames) + "x" + std::to_string(c.height) + "x" + std::to_string(c.width) + " ch " +
           std::to_string(c.channels[0]) + "/" + std::to_string(c.channels[1]) + "/" + std::to_string(c.channels[2]);
  };
  if (!(m == expected))
    throw ModelMismatchError("checkpoint model (" + dims(m) + ") does not match config (" + dims(expected) + ")");
}

}  // namespace semo
