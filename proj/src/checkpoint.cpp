#include "tossing/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <zlib.h>

namespace tossing {

namespace {

class Writer {
public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint32_t u32() {
    if (pos_ + 4 > end_) {
      throw CheckpointError(CheckpointError::Check::dimensions, "payload ends inside a field");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const { return end_ - pos_; }

private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 4;  // after the magic
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

constexpr std::uint32_t kMaxDimension = 1u << 20;

}  // namespace

CheckpointError::CheckpointError(Check check, const std::string& message)
    : Error(fmt::format("checkpoint {} check failed: {}", to_string(check), message)),
      check_(check) {}

std::string to_string(CheckpointError::Check check) {
  switch (check) {
    case CheckpointError::Check::io: return "io";
    case CheckpointError::Check::magic: return "magic";
    case CheckpointError::Check::checksum: return "checksum";
    case CheckpointError::Check::version: return "version";
    case CheckpointError::Check::dimensions: return "dimension";
  }
  return "?";
}

std::vector<std::uint8_t> serialize_checkpoint(const QFunction& q) {
  const auto& net = q.net();
  Writer w;
  w.raw(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& layer : net.layers()) {
    w.u32(static_cast<std::uint32_t>(layer.inputs()));
    w.u32(static_cast<std::uint32_t>(layer.outputs()));
  }
  w.u32(static_cast<std::uint32_t>(net.head_count()));
  for (int width : net.head_widths()) w.u32(static_cast<std::uint32_t>(width));
  for (const auto& layer : net.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.f32(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) w.f32(layer.bias(r));
  }
  const std::uint32_t crc = crc32_of(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return std::move(w.bytes());
}

QFunction deserialize_checkpoint(const std::vector<std::uint8_t>& bytes,
                                 std::optional<std::array<int, 6>> expected_heads) {
  using Check = CheckpointError::Check;
  if (bytes.size() < kCheckpointMagic.size() ||
      !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw CheckpointError(Check::magic, "file does not start with TQCK");
  }
  if (bytes.size() < kCheckpointMagic.size() + 4) {
    throw CheckpointError(Check::checksum, "file too short to hold a checksum");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  const std::uint32_t actual = crc32_of(bytes.data(), body);
  if (stored != actual) {
    throw CheckpointError(Check::checksum,
                          fmt::format("stored {:08x}, computed {:08x}", stored, actual));
  }

  Reader r(bytes, body);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(Check::version, fmt::format("unsupported version {}", version));
  }

  const std::uint32_t layer_count = r.u32();
  if (layer_count == 0 || layer_count > 64) {
    throw CheckpointError(Check::dimensions, fmt::format("{} layers", layer_count));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(layer_count);
  for (auto& [in, out] : shapes) {
    in = r.u32();
    out = r.u32();
    if (in == 0 || out == 0 || in > kMaxDimension || out > kMaxDimension) {
      throw CheckpointError(Check::dimensions, "layer size out of range");
    }
  }
  const std::uint32_t head_count = r.u32();
  if (head_count != 6) {
    throw CheckpointError(Check::dimensions, fmt::format("{} heads, expected 6", head_count));
  }
  std::array<int, 6> heads{};
  for (auto& h : heads) {
    const std::uint32_t v = r.u32();
    if (v == 0 || v > kMaxDimension) throw CheckpointError(Check::dimensions, "bad head width");
    h = static_cast<int>(v);
  }
  if (expected_heads && *expected_heads != heads) {
    throw CheckpointError(Check::dimensions,
                          fmt::format("head widths {} differ from configured {}",
                                      fmt::join(heads, "x"), fmt::join(*expected_heads, "x")));
  }

  std::size_t floats = 0;
  for (const auto& [in, out] : shapes) floats += static_cast<std::size_t>(in) * out + out;
  if (r.remaining() != floats * 4) {
    throw CheckpointError(Check::dimensions,
                          fmt::format("{} payload bytes for {} parameters", r.remaining(), floats));
  }

  QNet::Layers layers;
  for (const auto& [in, out] : shapes) {
    DenseLayer<float> layer{Eigen::MatrixXf(out, in), Eigen::VectorXf(out)};
    for (Eigen::Index row = 0; row < layer.weight.rows(); ++row) {
      for (Eigen::Index col = 0; col < layer.weight.cols(); ++col) layer.weight(row, col) = r.f32();
    }
    for (Eigen::Index row = 0; row < layer.bias.size(); ++row) layer.bias(row) = r.f32();
    layers.push_back(std::move(layer));
  }
  try {
    return QFunction(QNet(std::move(layers), {heads.begin(), heads.end()}));
  } catch (const InvalidInput& e) {
    throw CheckpointError(Check::dimensions, e.what());
  }
}

void save_checkpoint(const QFunction& q, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(q);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Check::io, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Check::io, "write failed: " + path.string());
}

QFunction load_checkpoint(const std::filesystem::path& path,
                          std::optional<std::array<int, 6>> expected_heads) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Check::io, "file not found: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes, expected_heads);
}

}  // namespace tossing
