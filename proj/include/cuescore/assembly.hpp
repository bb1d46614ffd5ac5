#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cuescore/aligner.hpp"
#include "cuescore/lld.hpp"
#include "cuescore/matrix.hpp"

namespace cuescore {

inline constexpr std::size_t kPooledFeatures = 4;
inline constexpr std::size_t kFusionNumeric = 1 + kPooledFeatures;

/// Frame descriptors averaged over one phone span:
/// loudness, alpha ratio, f0 (voiced frames only), jitter (voiced frames only).
using PooledFeatures = std::array<double, kPooledFeatures>;

/// Per-phone input to the scoring network.
struct FusionRecord {
  double gopd = 0.0;
  PooledFeatures pooled{};
  std::size_t phone_index = 0;

  friend bool operator==(const FusionRecord&, const FusionRecord&) = default;
};

using FusionInput = std::vector<FusionRecord>;

/// Throws ShapeError when the alignment does not cover exactly frames.size() frames.
std::vector<PooledFeatures> pool_to_phonemes(const FrameFeatures& frames, const Alignment& alignment);

/// Position-wise stack of GoPD, pooled features and phone index. Lengths must agree.
FusionInput build_fusion_input(std::span<const PooledFeatures> pooled, std::span<const double> gopd,
                               std::span<const std::string> phones);

/// L x 5 numeric block (gopd, loudness, alpha, f0, jitter).
DenseMatrix fusion_numeric_matrix(const FusionInput& input);
/// L x 1 phone indices, the sidecar column of the numeric block.
DenseMatrix fusion_phone_matrix(const FusionInput& input);
FusionInput fusion_from_matrices(const DenseMatrix& numeric, const DenseMatrix& phones);

}  // namespace cuescore
