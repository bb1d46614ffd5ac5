#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cuescore/assembly.hpp"
#include "cuescore/functionals.hpp"
#include "cuescore/matrix.hpp"
#include "cuescore/scoring/model.hpp"

namespace cuescore {

// Layout convention: sequences are stored column-wise, one column per
// position (D x L for phone-level, D x T for context frames).

/// Everything the scoring head consumes for one utterance, before normalization.
struct UtteranceInputs {
  std::string id;
  FusionInput fusion;
  Eigen::MatrixXd context;  // model_dim x T, the encoder representation C_t
  std::array<double, kNumFunctionals> utterance{};
  int fluency = 0;
  int prosody = 0;
};

/// Converts a T x D MTX1 context matrix into the D x T column layout.
Eigen::MatrixXd context_from_matrix(const DenseMatrix& m);

struct LossWeights {
  double fluency = 0.5;
  double prosody = 0.5;
};

struct ScoreDistribution {
  Eigen::VectorXd fluency;  // classes
  Eigen::VectorXd prosody;
};

/// Per-direction activations kept for the backward pass.
struct LstmCache {
  Eigen::MatrixXd input;  // D x N
  Eigen::MatrixXd gates;  // 4H x N, post-activation (i, f, g, o)
  Eigen::MatrixXd cell;   // H x N
  Eigen::MatrixXd cell_tanh;
  Eigen::MatrixXd hidden;  // H x N
  bool reverse = false;
};

struct BiLstmCache {
  LstmCache fwd, bwd;
};

/// Intermediate values of one forward pass.
struct ForwardCache {
  std::vector<std::size_t> phones;
  Eigen::MatrixXd embedded;   // embed x L
  Eigen::MatrixXd projected;  // ff x L, tanh output
  Eigen::MatrixXd cue_input;  // (5 + ff) x L
  BiLstmCache cue;
  Eigen::MatrixXd phone_cues;  // model x L  (p_nv)
  Eigen::MatrixXd context;     // model x T
  Eigen::MatrixXd attention;   // L x T, row-stochastic
  Eigen::MatrixXd attended;    // model x L  (alpha)
  Eigen::VectorXd utterance_in;
  Eigen::VectorXd utterance_proj;  // model
  BiLstmCache fuse;
  Eigen::VectorXd pooled;
  Eigen::VectorXd fused;  // pooled + utterance_proj
  ScoreDistribution scores;
};

/// Runs one LSTM direction over the columns of `input`; returns H x N in position order.
Eigen::MatrixXd lstm_forward(const LstmParams& p, const Eigen::MatrixXd& input, bool reverse, LstmCache& cache);

/// Accumulates parameter gradients into `grad`; returns the pre-activation gate gradients (4H x N).
Eigen::MatrixXd lstm_gate_gradients(const LstmParams& p, const LstmCache& cache, const Eigen::MatrixXd& d_hidden,
                                    LstmParams& grad);

/// Accumulates parameter gradients into `grad`; returns d input (D x N).
Eigen::MatrixXd lstm_backward(const LstmParams& p, const LstmCache& cache, const Eigen::MatrixXd& d_hidden,
                              LstmParams& grad);

/// PhoneCue encoder: embedding, tanh feed-forward, concatenation with the numeric
/// block (gopd + 4 pooled features, already normalized), then a BiLSTM. Returns model_dim x L.
Eigen::MatrixXd phonecue_forward(const Eigen::MatrixXd& numeric, const std::vector<std::size_t>& phones,
                                 const ScoringModel& model, ForwardCache* cache = nullptr);

/// Single-head scaled dot-product cross-attention, queries from the phone cues
/// and keys = values = the context. Writes the L x T weights when requested.
Eigen::MatrixXd cross_attention(const Eigen::MatrixXd& phone_cues, const Eigen::MatrixXd& context,
                                Eigen::MatrixXd* weights = nullptr);

/// Fusion over [context; attended; projected utterance token], mean pooling,
/// utterance residual and the two softmax heads.
ScoreDistribution projection_forward(const Eigen::MatrixXd& context, const Eigen::MatrixXd& attended,
                                     const Eigen::VectorXd& utterance, const ScoringModel& model,
                                     ForwardCache* cache = nullptr);

/// Normalizes the raw inputs with the model's normalizer and runs the whole head.
ScoreDistribution forward(const UtteranceInputs& inputs, const ScoringModel& model, ForwardCache* cache = nullptr);

/// w_f * CE(fluency) + w_p * CE(prosody), natural log. Labels must lie in 0..classes-1.
double loss(const ScoreDistribution& scores, int fluency_label, int prosody_label, LossWeights weights = {});

/// Reverse-mode gradients of `loss` for the cached forward pass, accumulated into `grad`.
void backward(const ForwardCache& cache, const ScoringModel& model, int fluency_label, int prosody_label,
              LossWeights weights, Parameters& grad);

/// Forward + loss + backward for one utterance. Returns the loss.
double loss_and_gradient(const UtteranceInputs& inputs, const ScoringModel& model, LossWeights weights,
                         Parameters& grad);

/// Expected class index, sum_k k * p_k.
double predict_score(const Eigen::VectorXd& distribution);

}  // namespace cuescore
