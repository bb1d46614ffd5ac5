#include "cuescore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cuescore/error.hpp"

namespace cuescore {

PccResult pcc(std::span<const double> predictions, std::span<const double> references) {
  if (predictions.size() != references.size()) {
    throw ShapeError("pcc: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(references.size()) + " references");
  }
  const std::size_t n = predictions.size();
  if (n < 2) throw DomainError("pcc needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += predictions[i];
    my += references[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = predictions[i] - mx;
    const double dy = references[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (syy == 0.0) throw DomainError("pcc: reference scores are constant");
  if (sxx == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

}  // namespace cuescore
