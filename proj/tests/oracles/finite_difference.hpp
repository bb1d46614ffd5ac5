#pragma once
// Central finite differences, f'(x) ~ (f(x+h) - f(x-h)) / 2h.

#include <cmath>
#include <functional>

namespace oracle {

inline double central_difference(double& x, double h, const std::function<double()>& f) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero gradients from
// dominating the ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace oracle
