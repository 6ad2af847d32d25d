#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tossing/errors.hpp"
#include "tossing/learner.hpp"

namespace tossing {

// Layout, little-endian throughout:
//   "TQCK" | u32 version | u32 layer count | (u32 in, u32 out) per layer
//   | u32 head count | u32 width per head
//   | per layer: f32 weights row-major (out x in), then f32 biases
//   | u32 CRC-32 of every preceding byte
inline constexpr std::array<char, 4> kCheckpointMagic{'T', 'Q', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public Error {
public:
  enum class Check { io, magic, checksum, version, dimensions };

  CheckpointError(Check check, const std::string& message);
  Check check() const { return check_; }

private:
  Check check_;
};

std::string to_string(CheckpointError::Check check);

std::vector<std::uint8_t> serialize_checkpoint(const QFunction& q);
QFunction deserialize_checkpoint(const std::vector<std::uint8_t>& bytes,
                                 std::optional<std::array<int, 6>> expected_heads = std::nullopt);

void save_checkpoint(const QFunction& q, const std::filesystem::path& path);
QFunction load_checkpoint(const std::filesystem::path& path,
                          std::optional<std::array<int, 6>> expected_heads = std::nullopt);

}  // namespace tossing
