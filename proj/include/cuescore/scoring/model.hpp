#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "cuescore/functionals.hpp"
#include "cuescore/phonemes.hpp"

namespace cuescore {

/// Layer widths of the scoring head. Defaults are the full-size network;
/// tests shrink `embed_dim`, `ff_dim` and `hidden` for gradient checks.
struct ModelConfig {
  std::size_t vocab = kNumPhones;
  std::size_t embed_dim = 41;
  std::size_t ff_dim = 24;
  std::size_t hidden = 512;  // per direction; model width is 2*hidden
  std::size_t utt_dim = kNumFunctionals;
  std::size_t classes = 11;

  std::size_t model_dim() const { return 2 * hidden; }
  std::size_t cue_input_dim() const { return 5 + ff_dim; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Gate-stacked LSTM weights, gate order (input, forget, cell, output).
struct LstmParams {
  Eigen::MatrixXd w_input;      // 4H x D
  Eigen::MatrixXd w_recurrent;  // 4H x H
  Eigen::MatrixXd bias;         // 4H x 1
};

/// Every learnable tensor. The same struct carries gradients and optimizer moments.
struct Parameters {
  Eigen::MatrixXd embedding;  // vocab x embed
  Eigen::MatrixXd ff_weight;  // ff x embed
  Eigen::MatrixXd ff_bias;    // ff x 1
  LstmParams cue_fwd, cue_bwd;
  Eigen::MatrixXd utt_weight;  // model x utt
  Eigen::MatrixXd utt_bias;    // model x 1
  LstmParams fuse_fwd, fuse_bwd;
  Eigen::MatrixXd fluency_weight;  // classes x model
  Eigen::MatrixXd fluency_bias;
  Eigen::MatrixXd prosody_weight;
  Eigen::MatrixXd prosody_bias;

  static Parameters zeros(const ModelConfig& config);

  /// Calls f(name, tensor) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    f("embedding", embedding);
    f("ff.weight", ff_weight);
    f("ff.bias", ff_bias);
    visit_lstm("cue.fwd", cue_fwd, f);
    visit_lstm("cue.bwd", cue_bwd, f);
    f("utt.weight", utt_weight);
    f("utt.bias", utt_bias);
    visit_lstm("fuse.fwd", fuse_fwd, f);
    visit_lstm("fuse.bwd", fuse_bwd, f);
    f("head.fluency.weight", fluency_weight);
    f("head.fluency.bias", fluency_bias);
    f("head.prosody.weight", prosody_weight);
    f("head.prosody.bias", prosody_bias);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<Parameters*>(this)->visit([&](std::string_view name, Eigen::MatrixXd& m) {
      f(name, static_cast<const Eigen::MatrixXd&>(m));
    });
  }

  std::size_t count() const;
  bool all_finite() const;
  void set_zero();
  /// this += scale * other, tensor by tensor.
  void add_scaled(const Parameters& other, double scale);
  void scale(double factor);

 private:
  template <typename F>
  static void visit_lstm(const std::string& prefix, LstmParams& p, F& f) {
    f(prefix + ".w_input", p.w_input);
    f(prefix + ".w_recurrent", p.w_recurrent);
    f(prefix + ".bias", p.bias);
  }
};

/// Fixed per-dimension standardization of the numeric inputs, fitted on the
/// training split and stored with the model. Identity until fitted.
struct FeatureNormalizer {
  Eigen::VectorXd numeric_mean = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd numeric_scale = Eigen::VectorXd::Ones(5);
  Eigen::VectorXd utterance_mean = Eigen::VectorXd::Zero(kNumFunctionals);
  Eigen::VectorXd utterance_scale = Eigen::VectorXd::Ones(kNumFunctionals);
};

struct ScoringModel {
  ModelConfig config;
  Parameters params;
  FeatureNormalizer normalizer;
};

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per tensor from a seeded stream.
/// The embedding's fan-in is 1 (one-hot input); biases share their layer's bound.
ScoringModel init_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace cuescore
