#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "tossing/checkpoint.hpp"

using namespace tossing;
namespace fs = std::filesystem;

namespace {

// Bitwise reflected CRC-32 (poly 0xEDB88320), independent of zlib.
std::uint32_t crc32_oracle(const std::uint8_t* data, std::size_t n) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

void reseal(std::vector<std::uint8_t>& bytes) {
  const std::uint32_t crc = crc32_oracle(bytes.data(), bytes.size() - 4);
  for (int i = 0; i < 4; ++i) bytes[bytes.size() - 4 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(crc >> (8 * i));
}

QFunction sample_q(std::uint64_t seed, std::vector<int> hidden = {32, 16}) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.hidden = std::move(hidden);
  return initial_qfunction(ActionGrid::desk_default(), cfg);
}

CheckpointError::Check failure(const std::vector<std::uint8_t>& bytes,
                               std::optional<std::array<int, 6>> heads = std::nullopt) {
  try {
    deserialize_checkpoint(bytes, heads);
  } catch (const CheckpointError& e) {
    return e.check();
  }
  ADD_FAILURE() << "checkpoint unexpectedly loaded";
  return CheckpointError::Check::io;
}

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tossing_checkpoint_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const QFunction q = sample_q(11, {256, 256});
  const fs::path path = temp_file("roundtrip.tqck");
  save_checkpoint(q, path);
  const QFunction back = load_checkpoint(path, ActionGrid::desk_default().cardinalities());
  EXPECT_EQ(back.head_widths(), q.head_widths());
  Rng rng(5);
  const BoxObject box{"O1", 0.116, 0.049, 0.135, "box", true};
  for (int i = 0; i < 100; ++i) {
    const GraspState s = sample_grasp(box, rng);
    const Eigen::VectorXf a = q.values(s);
    const Eigen::VectorXf b = back.values(s);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())), 0);
  }
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(q));
}

TEST(Checkpoint, HeaderAndTrailer) {
  const auto bytes = serialize_checkpoint(sample_q(1));
  ASSERT_GT(bytes.size(), 12u);
  EXPECT_EQ(std::memcmp(bytes.data(), "TQCK", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  const std::uint32_t stored = bytes[bytes.size() - 4] | (bytes[bytes.size() - 3] << 8) |
                               (bytes[bytes.size() - 2] << 16) |
                               (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
  EXPECT_EQ(stored, crc32_oracle(bytes.data(), bytes.size() - 4));
}

TEST(Checkpoint, TruncatedFileFailsChecksum) {
  auto bytes = serialize_checkpoint(sample_q(2));
  bytes.resize(bytes.size() - 37);
  EXPECT_EQ(failure(bytes), CheckpointError::Check::checksum);
}

TEST(Checkpoint, FlippedPayloadBitFailsChecksum) {
  auto bytes = serialize_checkpoint(sample_q(2));
  bytes[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(failure(bytes), CheckpointError::Check::checksum);
}

TEST(Checkpoint, BadMagic) {
  auto bytes = serialize_checkpoint(sample_q(3));
  bytes[0] = 'X';
  EXPECT_EQ(failure(bytes), CheckpointError::Check::magic);
  EXPECT_EQ(failure({'T', 'Q'}), CheckpointError::Check::magic);
}

TEST(Checkpoint, UnknownVersion) {
  auto bytes = serialize_checkpoint(sample_q(4));
  bytes[4] = 2;
  reseal(bytes);
  EXPECT_EQ(failure(bytes), CheckpointError::Check::version);
}

TEST(Checkpoint, HeadMismatchFailsDimensions) {
  const auto bytes = serialize_checkpoint(sample_q(5));
  EXPECT_EQ(failure(bytes, std::array<int, 6>{7, 7, 7, 5, 5, 5}), CheckpointError::Check::dimensions);
  EXPECT_NO_THROW(deserialize_checkpoint(bytes, ActionGrid::desk_default().cardinalities()));
}

TEST(Checkpoint, InconsistentLayerTableFailsDimensions) {
  auto bytes = serialize_checkpoint(sample_q(6));
  // First layer's input width lives right after the layer count.
  bytes[12] = 5;
  reseal(bytes);
  EXPECT_EQ(failure(bytes), CheckpointError::Check::dimensions);
}

TEST(Checkpoint, MissingFileFailsIo) {
  try {
    load_checkpoint(temp_file("does_not_exist.tqck"));
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.check(), CheckpointError::Check::io);
  }
}

TEST(Checkpoint, CheckNames) {
  EXPECT_EQ(to_string(CheckpointError::Check::magic), "magic");
  EXPECT_EQ(to_string(CheckpointError::Check::checksum), "checksum");
  EXPECT_EQ(to_string(CheckpointError::Check::version), "version");
  EXPECT_EQ(to_string(CheckpointError::Check::dimensions), "dimension");
  EXPECT_EQ(to_string(CheckpointError::Check::io), "io");
}
