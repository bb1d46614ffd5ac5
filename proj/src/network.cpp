#include "cuescore/scoring/network.hpp"

#include <cmath>

#include "cuescore/error.hpp"

namespace cuescore {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

VectorXd softmax(const VectorXd& z) {
  const VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

MatrixXd normalize_numeric(const FusionInput& fusion, const FeatureNormalizer& norm) {
  MatrixXd numeric(5, static_cast<Index>(fusion.size()));
  for (std::size_t i = 0; i < fusion.size(); ++i) {
    const auto col = static_cast<Index>(i);
    numeric(0, col) = fusion[i].gopd;
    for (std::size_t k = 0; k < kPooledFeatures; ++k) numeric(static_cast<Index>(1 + k), col) = fusion[i].pooled[k];
  }
  numeric.colwise() -= norm.numeric_mean;
  numeric.array().colwise() /= norm.numeric_scale.array();
  return numeric;
}

VectorXd normalize_utterance(const std::array<double, kNumFunctionals>& u, const FeatureNormalizer& norm) {
  VectorXd v = Eigen::Map<const VectorXd>(u.data(), static_cast<Index>(u.size()));
  return ((v - norm.utterance_mean).array() / norm.utterance_scale.array()).matrix();
}

MatrixXd bilstm_forward(const LstmParams& fwd, const LstmParams& bwd, const MatrixXd& input, BiLstmCache& cache) {
  const MatrixXd h_fwd = lstm_forward(fwd, input, false, cache.fwd);
  const MatrixXd h_bwd = lstm_forward(bwd, input, true, cache.bwd);
  MatrixXd out(h_fwd.rows() + h_bwd.rows(), input.cols());
  out << h_fwd, h_bwd;
  return out;
}

/// Input gradient for columns [first_col, N) only; earlier columns feed nothing trainable.
MatrixXd bilstm_backward(const LstmParams& fwd, const LstmParams& bwd, const BiLstmCache& cache,
                         const MatrixXd& d_out, LstmParams& grad_fwd, LstmParams& grad_bwd, Index first_col = 0) {
  const Index h = fwd.w_recurrent.cols();
  const Index n = d_out.cols() - first_col;
  const MatrixXd d_pre_fwd = lstm_gate_gradients(fwd, cache.fwd, d_out.topRows(h), grad_fwd);
  const MatrixXd d_pre_bwd = lstm_gate_gradients(bwd, cache.bwd, d_out.bottomRows(h), grad_bwd);
  MatrixXd d_input = fwd.w_input.transpose() * d_pre_fwd.rightCols(n);
  d_input.noalias() += bwd.w_input.transpose() * d_pre_bwd.rightCols(n);
  return d_input;
}

}  // namespace

Eigen::MatrixXd context_from_matrix(const DenseMatrix& m) {
  MatrixXd c(static_cast<Index>(m.cols()), static_cast<Index>(m.rows()));
  for (std::size_t t = 0; t < m.rows(); ++t)
    for (std::size_t d = 0; d < m.cols(); ++d) c(static_cast<Index>(d), static_cast<Index>(t)) = m(t, d);
  return c;
}

Eigen::MatrixXd lstm_forward(const LstmParams& p, const Eigen::MatrixXd& input, bool reverse, LstmCache& cache) {
  const Index h = p.w_recurrent.cols();
  const Index n = input.cols();
  if (input.rows() != p.w_input.cols()) throw ShapeError("LSTM input width mismatch");
  cache.reverse = reverse;
  cache.input = input;
  cache.gates.resize(4 * h, n);
  cache.cell.resize(h, n);
  cache.cell_tanh.resize(h, n);
  cache.hidden.resize(h, n);

  MatrixXd pre = p.w_input * input;
  pre.colwise() += p.bias.col(0);

  VectorXd h_prev = VectorXd::Zero(h);
  VectorXd c_prev = VectorXd::Zero(h);
  VectorXd a(4 * h);
  for (Index k = 0; k < n; ++k) {
    const Index t = reverse ? n - 1 - k : k;
    a.noalias() = pre.col(t);
    a.noalias() += p.w_recurrent * h_prev;
    auto gates = cache.gates.col(t);
    for (Index j = 0; j < h; ++j) {
      gates(j) = sigmoid(a(j));
      gates(h + j) = sigmoid(a(h + j));
      gates(2 * h + j) = std::tanh(a(2 * h + j));
      gates(3 * h + j) = sigmoid(a(3 * h + j));
    }
    for (Index j = 0; j < h; ++j) {
      const double c = gates(h + j) * c_prev(j) + gates(j) * gates(2 * h + j);
      const double tc = std::tanh(c);
      cache.cell(j, t) = c;
      cache.cell_tanh(j, t) = tc;
      cache.hidden(j, t) = gates(3 * h + j) * tc;
    }
    h_prev = cache.hidden.col(t);
    c_prev = cache.cell.col(t);
  }
  return cache.hidden;
}

Eigen::MatrixXd lstm_gate_gradients(const LstmParams& p, const LstmCache& cache, const Eigen::MatrixXd& d_hidden,
                                    LstmParams& grad) {
  const Index h = p.w_recurrent.cols();
  const Index n = cache.input.cols();
  const bool reverse = cache.reverse;
  auto position = [&](Index k) { return reverse ? n - 1 - k : k; };

  MatrixXd d_pre(4 * h, n);
  MatrixXd h_prev_all = MatrixXd::Zero(h, n);
  VectorXd dh_next = VectorXd::Zero(h);
  VectorXd dc_next = VectorXd::Zero(h);
  for (Index k = n - 1; k >= 0; --k) {
    const Index t = position(k);
    const bool first = k == 0;
    const Index t_prev = first ? 0 : position(k - 1);
    if (!first) h_prev_all.col(t) = cache.hidden.col(t_prev);
    const auto gates = cache.gates.col(t);
    auto d_gate = d_pre.col(t);
    for (Index j = 0; j < h; ++j) {
      const double i = gates(j), f = gates(h + j), g = gates(2 * h + j), o = gates(3 * h + j);
      const double tc = cache.cell_tanh(j, t);
      const double c_prev = first ? 0.0 : cache.cell(j, t_prev);
      const double dh = d_hidden(j, t) + dh_next(j);
      const double d_o = dh * tc;
      const double dc = dh * o * (1.0 - tc * tc) + dc_next(j);
      d_gate(j) = dc * g * i * (1.0 - i);
      d_gate(h + j) = dc * c_prev * f * (1.0 - f);
      d_gate(2 * h + j) = dc * i * (1.0 - g * g);
      d_gate(3 * h + j) = d_o * o * (1.0 - o);
      dc_next(j) = dc * f;
    }
    dh_next.noalias() = p.w_recurrent.transpose() * d_gate;
  }
  grad.w_recurrent.noalias() += d_pre * h_prev_all.transpose();
  grad.w_input.noalias() += d_pre * cache.input.transpose();
  grad.bias += d_pre.rowwise().sum();
  return d_pre;
}

Eigen::MatrixXd lstm_backward(const LstmParams& p, const LstmCache& cache, const Eigen::MatrixXd& d_hidden,
                              LstmParams& grad) {
  return p.w_input.transpose() * lstm_gate_gradients(p, cache, d_hidden, grad);
}

Eigen::MatrixXd phonecue_forward(const Eigen::MatrixXd& numeric, const std::vector<std::size_t>& phones,
                                 const ScoringModel& model, ForwardCache* cache) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const auto n = static_cast<Index>(phones.size());
  if (n == 0) throw ShapeError("phone sequence is empty");
  if (numeric.rows() != 5 || numeric.cols() != n) throw ShapeError("numeric block must be 5 x L");

  MatrixXd embedded(static_cast<Index>(cfg.embed_dim), n);
  for (Index i = 0; i < n; ++i) {
    const std::size_t idx = phones[static_cast<std::size_t>(i)];
    if (idx >= cfg.vocab) throw InventoryError("phone index " + std::to_string(idx) + " out of range");
    embedded.col(i) = p.embedding.row(static_cast<Index>(idx)).transpose();
  }
  MatrixXd projected = p.ff_weight * embedded;
  projected.colwise() += p.ff_bias.col(0);
  projected = projected.array().tanh().matrix();

  MatrixXd cue_input(static_cast<Index>(cfg.cue_input_dim()), n);
  cue_input << numeric, projected;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  MatrixXd out = bilstm_forward(p.cue_fwd, p.cue_bwd, cue_input, c.cue);
  if (cache) {
    c.phones = phones;
    c.embedded = std::move(embedded);
    c.projected = std::move(projected);
    c.cue_input = std::move(cue_input);
    c.phone_cues = out;
  }
  return out;
}

Eigen::MatrixXd cross_attention(const Eigen::MatrixXd& phone_cues, const Eigen::MatrixXd& context,
                                Eigen::MatrixXd* weights) {
  if (phone_cues.rows() != context.rows()) {
    throw ShapeError("attention width mismatch: " + std::to_string(phone_cues.rows()) + " vs " +
                     std::to_string(context.rows()));
  }
  if (phone_cues.cols() == 0 || context.cols() == 0) throw ShapeError("attention needs L >= 1 and T >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(context.rows()));
  MatrixXd scores = scale * (phone_cues.transpose() * context);  // L x T
  for (Index i = 0; i < scores.rows(); ++i) {
    const double peak = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - peak).exp();
    scores.row(i) /= scores.row(i).sum();
  }
  MatrixXd attended = context * scores.transpose();  // D x L
  if (weights) *weights = std::move(scores);
  return attended;
}

ScoreDistribution projection_forward(const Eigen::MatrixXd& context, const Eigen::MatrixXd& attended,
                                     const Eigen::VectorXd& utterance, const ScoringModel& model,
                                     ForwardCache* cache) {
  const auto& p = model.params;
  const auto d = static_cast<Index>(model.config.model_dim());
  if (context.rows() != d || attended.rows() != d) throw ShapeError("projection inputs must be model_dim wide");
  if (utterance.size() != static_cast<Index>(model.config.utt_dim)) throw ShapeError("utterance vector width mismatch");

  VectorXd u = p.utt_weight * utterance + p.utt_bias.col(0);
  MatrixXd sequence(d, context.cols() + attended.cols() + 1);
  sequence << context, attended, u;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  const MatrixXd fused_seq = bilstm_forward(p.fuse_fwd, p.fuse_bwd, sequence, c.fuse);
  VectorXd pooled = fused_seq.rowwise().mean();
  VectorXd fused = pooled + u;

  ScoreDistribution out;
  out.fluency = softmax(p.fluency_weight * fused + p.fluency_bias.col(0));
  out.prosody = softmax(p.prosody_weight * fused + p.prosody_bias.col(0));
  if (cache) {
    c.utterance_in = utterance;
    c.utterance_proj = std::move(u);
    c.pooled = std::move(pooled);
    c.fused = std::move(fused);
    c.scores = out;
  }
  return out;
}

ScoreDistribution forward(const UtteranceInputs& inputs, const ScoringModel& model, ForwardCache* cache) {
  std::vector<std::size_t> phones;
  phones.reserve(inputs.fusion.size());
  for (const auto& r : inputs.fusion) phones.push_back(r.phone_index);
  const MatrixXd numeric = normalize_numeric(inputs.fusion, model.normalizer);
  const VectorXd utterance = normalize_utterance(inputs.utterance, model.normalizer);

  const MatrixXd cues = phonecue_forward(numeric, phones, model, cache);
  MatrixXd weights;
  const MatrixXd attended = cross_attention(cues, inputs.context, &weights);
  if (cache) {
    cache->context = inputs.context;
    cache->attention = std::move(weights);
    cache->attended = attended;
  }
  return projection_forward(inputs.context, attended, utterance, model, cache);
}

double loss(const ScoreDistribution& scores, int fluency_label, int prosody_label, LossWeights weights) {
  const auto classes = scores.fluency.size();
  auto check = [classes](int label) {
    if (label < 0 || label >= classes) {
      throw DomainError("label " + std::to_string(label) + " outside 0.." + std::to_string(classes - 1));
    }
  };
  check(fluency_label);
  check(prosody_label);
  return weights.fluency * -std::log(scores.fluency(fluency_label)) +
         weights.prosody * -std::log(scores.prosody(prosody_label));
}

void backward(const ForwardCache& c, const ScoringModel& model, int fluency_label, int prosody_label,
              LossWeights weights, Parameters& grad) {
  const auto& p = model.params;
  const Index d = static_cast<Index>(model.config.model_dim());
  const Index t_len = c.context.cols();
  const Index l_len = c.attended.cols();

  // Heads: d logits = w * (p - onehot).
  VectorXd dz_f = weights.fluency * c.scores.fluency;
  dz_f(fluency_label) -= weights.fluency;
  VectorXd dz_p = weights.prosody * c.scores.prosody;
  dz_p(prosody_label) -= weights.prosody;
  grad.fluency_weight.noalias() += dz_f * c.fused.transpose();
  grad.fluency_bias += dz_f;
  grad.prosody_weight.noalias() += dz_p * c.fused.transpose();
  grad.prosody_bias += dz_p;
  VectorXd d_fused = p.fluency_weight.transpose() * dz_f;
  d_fused.noalias() += p.prosody_weight.transpose() * dz_p;

  // Residual and mean pooling.
  VectorXd d_u = d_fused;
  const Index n_seq = t_len + l_len + 1;
  const MatrixXd d_seq_out = (d_fused / static_cast<double>(n_seq)).replicate(1, n_seq);
  // The context columns are frozen inputs, so only the attended and utterance columns need d input.
  const MatrixXd d_seq =
      bilstm_backward(p.fuse_fwd, p.fuse_bwd, c.fuse, d_seq_out, grad.fuse_fwd, grad.fuse_bwd, t_len);
  const MatrixXd d_attended = d_seq.leftCols(l_len);
  d_u += d_seq.col(l_len);

  grad.utt_weight.noalias() += d_u * c.utterance_in.transpose();
  grad.utt_bias += d_u;

  // attended = C * A^T; A = rowsoftmax(S); S = cues^T C / sqrt(d).
  const MatrixXd d_attn = d_attended.transpose() * c.context;  // L x T
  MatrixXd d_scores(l_len, t_len);
  for (Index i = 0; i < l_len; ++i) {
    const double dot = d_attn.row(i).dot(c.attention.row(i));
    d_scores.row(i) = c.attention.row(i).array() * (d_attn.row(i).array() - dot);
  }
  const MatrixXd d_cues = (1.0 / std::sqrt(static_cast<double>(d))) * (c.context * d_scores.transpose());

  const MatrixXd d_cue_input = bilstm_backward(p.cue_fwd, p.cue_bwd, c.cue, d_cues, grad.cue_fwd, grad.cue_bwd);
  const Index ff = static_cast<Index>(model.config.ff_dim);
  const MatrixXd d_proj_pre =
      (d_cue_input.bottomRows(ff).array() * (1.0 - c.projected.array().square())).matrix();  // ff x L
  grad.ff_weight.noalias() += d_proj_pre * c.embedded.transpose();
  grad.ff_bias += d_proj_pre.rowwise().sum();
  const MatrixXd d_embedded = p.ff_weight.transpose() * d_proj_pre;
  for (Index i = 0; i < l_len; ++i) {
    grad.embedding.row(static_cast<Index>(c.phones[static_cast<std::size_t>(i)])) += d_embedded.col(i).transpose();
  }
}

double loss_and_gradient(const UtteranceInputs& inputs, const ScoringModel& model, LossWeights weights,
                         Parameters& grad) {
  ForwardCache cache;
  const ScoreDistribution scores = forward(inputs, model, &cache);
  const double value = loss(scores, inputs.fluency, inputs.prosody, weights);
  backward(cache, model, inputs.fluency, inputs.prosody, weights, grad);
  return value;
}

double predict_score(const Eigen::VectorXd& distribution) {
  double s = 0.0;
  for (Index k = 0; k < distribution.size(); ++k) s += static_cast<double>(k) * distribution(k);
  return s;
}

}  // namespace cuescore
