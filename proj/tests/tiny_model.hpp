#pragma once
// Small random models and inputs for the scoring-head tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cuescore/scoring/network.hpp"

namespace testing_support {

inline cuescore::ModelConfig tiny_config(std::size_t hidden = 4) {
  cuescore::ModelConfig c;
  c.embed_dim = 5;
  c.ff_dim = 3;
  c.hidden = hidden;
  return c;
}

/// Random utterance of L phones and T context frames for a model of width `dim`.
inline cuescore::UtteranceInputs random_inputs(std::uint64_t seed, std::size_t phones, std::size_t frames,
                                               std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> phone(0, cuescore::kNumPhones - 1);
  std::uniform_int_distribution<int> label(0, 10);
  cuescore::UtteranceInputs u;
  u.id = "rand" + std::to_string(seed);
  for (std::size_t i = 0; i < phones; ++i) {
    cuescore::FusionRecord r;
    r.gopd = -4.0 + n01(rng);
    for (auto& v : r.pooled) v = n01(rng);
    r.phone_index = phone(rng);
    u.fusion.push_back(r);
  }
  u.context.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(frames));
  for (Eigen::Index j = 0; j < u.context.cols(); ++j)
    for (Eigen::Index i = 0; i < u.context.rows(); ++i) u.context(i, j) = 0.5 * n01(rng);
  for (auto& v : u.utterance) v = n01(rng);
  u.fluency = label(rng);
  u.prosody = label(rng);
  return u;
}

inline std::vector<cuescore::UtteranceInputs> random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::vector<cuescore::UtteranceInputs> out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = len(rng);
    const std::size_t t = len(rng) + 2;
    out.push_back(random_inputs(seed * 1000 + i, l, t, dim));
  }
  return out;
}

}  // namespace testing_support
