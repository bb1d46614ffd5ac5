#pragma once

#include <cstdint>
#include <random>

#include "cuescore/lld.hpp"

namespace testing_support {

/// Random frame descriptors: alternating voicing runs, a random-walk pitch
/// contour with occasional plateaus on voiced frames, zeros elsewhere.
inline cuescore::FrameFeatures random_frame_features(std::uint64_t seed, std::size_t min_frames = 20,
                                                     std::size_t max_frames = 200) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(min_frames, max_frames), run(1, 25);
  std::uniform_real_distribution<double> step(-1.5, 1.5), unit(0.0, 1.0);
  cuescore::FrameFeatures f;
  const std::size_t n = len(rng);
  bool voiced = unit(rng) < 0.5;
  double st = 30.0 + 10.0 * unit(rng);
  while (f.size() < n) {
    const std::size_t r = std::min(run(rng), n - f.size());
    for (std::size_t i = 0; i < r; ++i) {
      if (unit(rng) > 0.2) st += step(rng);
      f.loudness.push_back(5.0 * unit(rng));
      f.alpha_ratio_db.push_back(20.0 * unit(rng) - 10.0);
      f.f0_semitones.push_back(voiced ? st : 0.0);
      f.jitter_local.push_back(voiced ? 0.03 * unit(rng) : 0.0);
      f.voiced.push_back(voiced ? 1 : 0);
    }
    voiced = !voiced;
  }
  return f;
}

}  // namespace testing_support
