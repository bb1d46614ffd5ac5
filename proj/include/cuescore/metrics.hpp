#pragma once

#include <span>

namespace cuescore {

struct PccResult {
  double r = 0.0;
  /// Set when the predictions are constant; r is then defined as 0.
  bool constant_prediction = false;
};

/// Pearson correlation. Throws ShapeError on length mismatch, DomainError for
/// fewer than two points or a constant reference.
PccResult pcc(std::span<const double> predictions, std::span<const double> references);

}  // namespace cuescore
