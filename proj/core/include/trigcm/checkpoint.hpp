#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "trigcm/trainer.hpp"

namespace trigcm {

inline constexpr char kCheckpointMagic[8] = {'T', 'R', 'I', 'G', 'C', 'M', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian layout:
//   magic[8] "TRIGCMCK", u32 version
//   u32 length + UTF-8 config text (canonical `key = value` lines)
//   u64 epoch, u64 next_batch, u64 adam_step, u64 rng_seed
//   u32 tensor count, then per tensor:
//     u32 name length, name, u32 rank, u64 dims[rank], f64 data[numel]
// Tensors are `param/<name>`, `adam.m/<name>`, `adam.v/<name>` in model
// parameter order.
std::string encode_checkpoint(const TrainState& state);

// Throws FormatError on bad magic or truncation and VersionError on a
// version mismatch. Nothing is returned unless the whole payload parsed.
TrainState decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace trigcm
