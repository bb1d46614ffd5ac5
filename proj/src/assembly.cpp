#include "cuescore/assembly.hpp"

#include <cmath>

#include "cuescore/error.hpp"
#include "cuescore/phonemes.hpp"

namespace cuescore {

std::vector<PooledFeatures> pool_to_phonemes(const FrameFeatures& frames, const Alignment& alignment) {
  if (covered_frames(alignment) != frames.size()) {
    throw ShapeError("alignment covers " + std::to_string(covered_frames(alignment)) + " frames but features have " +
                     std::to_string(frames.size()));
  }
  validate_alignment(alignment, frames.size());
  std::vector<PooledFeatures> out;
  out.reserve(alignment.size());
  for (const auto& span : alignment) {
    double loud = 0.0, alpha = 0.0, f0 = 0.0, jitter = 0.0;
    std::size_t voiced = 0;
    for (std::size_t t = span.start_frame; t <= span.end_frame; ++t) {
      loud += frames.loudness[t];
      alpha += frames.alpha_ratio_db[t];
      if (frames.voiced[t]) {
        f0 += frames.f0_semitones[t];
        jitter += frames.jitter_local[t];
        ++voiced;
      }
    }
    const auto n = static_cast<double>(span.num_frames());
    PooledFeatures p{loud / n, alpha / n, 0.0, 0.0};
    if (voiced > 0) {
      p[2] = f0 / static_cast<double>(voiced);
      p[3] = jitter / static_cast<double>(voiced);
    }
    out.push_back(p);
  }
  return out;
}

FusionInput build_fusion_input(std::span<const PooledFeatures> pooled, std::span<const double> gopd,
                               std::span<const std::string> phones) {
  if (pooled.size() != gopd.size() || pooled.size() != phones.size()) {
    throw ShapeError("fusion input lengths differ: pooled " + std::to_string(pooled.size()) + ", gopd " +
                     std::to_string(gopd.size()) + ", phones " + std::to_string(phones.size()));
  }
  FusionInput out;
  out.reserve(phones.size());
  for (std::size_t i = 0; i < phones.size(); ++i) {
    out.push_back({gopd[i], pooled[i], PhonemeInventory::index(phones[i])});
  }
  return out;
}

DenseMatrix fusion_numeric_matrix(const FusionInput& input) {
  DenseMatrix m(input.size(), kFusionNumeric);
  for (std::size_t i = 0; i < input.size(); ++i) {
    m(i, 0) = static_cast<float>(input[i].gopd);
    for (std::size_t k = 0; k < kPooledFeatures; ++k) m(i, 1 + k) = static_cast<float>(input[i].pooled[k]);
  }
  return m;
}

DenseMatrix fusion_phone_matrix(const FusionInput& input) {
  DenseMatrix m(input.size(), 1);
  for (std::size_t i = 0; i < input.size(); ++i) m(i, 0) = static_cast<float>(input[i].phone_index);
  return m;
}

FusionInput fusion_from_matrices(const DenseMatrix& numeric, const DenseMatrix& phones) {
  if (numeric.cols() != kFusionNumeric || phones.cols() != 1 || numeric.rows() != phones.rows()) {
    throw ShapeError("fusion matrices must be L x 5 and L x 1");
  }
  FusionInput out(numeric.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].gopd = numeric(i, 0);
    for (std::size_t k = 0; k < kPooledFeatures; ++k) out[i].pooled[k] = numeric(i, 1 + k);
    const float idx = phones(i, 0);
    if (idx < 0.0f || idx != std::floor(idx) || idx >= static_cast<float>(kNumPhones)) {
      throw InventoryError("phone index " + std::to_string(idx) + " out of range");
    }
    out[i].phone_index = static_cast<std::size_t>(idx);
  }
  return out;
}

}  // namespace cuescore
