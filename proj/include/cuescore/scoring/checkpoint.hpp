#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cuescore/scoring/model.hpp"

namespace cuescore {

// Checkpoint layout: a UTF-8 index terminated by a line "end", then one MTX1
// block per tensor in index order.
//
//   CUESCORE-CHECKPOINT 1
//   config vocab=41 embed_dim=41 ff_dim=24 hidden=512 utt_dim=13 classes=11
//   tensor embedding 41 41
//   ...
//   end
//
// Tensors are stored as float32, so a reloaded model equals the saved one
// rounded to single precision. Identical models give identical bytes.

std::vector<std::uint8_t> encode_checkpoint(const ScoringModel& model);
ScoringModel decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const ScoringModel& model);
ScoringModel read_checkpoint(const std::filesystem::path& path);

}  // namespace cuescore
