#include "cuescore/scoring/model.hpp"

#include <cmath>
#include <random>

namespace cuescore {

namespace {

LstmParams lstm_zeros(std::size_t input, std::size_t hidden) {
  const auto gates = static_cast<Eigen::Index>(4 * hidden);
  return {Eigen::MatrixXd::Zero(gates, static_cast<Eigen::Index>(input)),
          Eigen::MatrixXd::Zero(gates, static_cast<Eigen::Index>(hidden)), Eigen::MatrixXd::Zero(gates, 1)};
}

Eigen::MatrixXd zeros(std::size_t rows, std::size_t cols) {
  return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace

Parameters Parameters::zeros(const ModelConfig& c) {
  Parameters p;
  p.embedding = cuescore::zeros(c.vocab, c.embed_dim);
  p.ff_weight = cuescore::zeros(c.ff_dim, c.embed_dim);
  p.ff_bias = cuescore::zeros(c.ff_dim, 1);
  p.cue_fwd = lstm_zeros(c.cue_input_dim(), c.hidden);
  p.cue_bwd = lstm_zeros(c.cue_input_dim(), c.hidden);
  p.utt_weight = cuescore::zeros(c.model_dim(), c.utt_dim);
  p.utt_bias = cuescore::zeros(c.model_dim(), 1);
  p.fuse_fwd = lstm_zeros(c.model_dim(), c.hidden);
  p.fuse_bwd = lstm_zeros(c.model_dim(), c.hidden);
  p.fluency_weight = cuescore::zeros(c.classes, c.model_dim());
  p.fluency_bias = cuescore::zeros(c.classes, 1);
  p.prosody_weight = cuescore::zeros(c.classes, c.model_dim());
  p.prosody_bias = cuescore::zeros(c.classes, 1);
  return p;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  visit([&](std::string_view, const Eigen::MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool Parameters::all_finite() const {
  bool ok = true;
  visit([&](std::string_view, const Eigen::MatrixXd& m) { ok = ok && m.allFinite(); });
  return ok;
}

void Parameters::set_zero() {
  visit([](std::string_view, Eigen::MatrixXd& m) { m.setZero(); });
}

void Parameters::add_scaled(const Parameters& other, double s) {
  std::vector<const Eigen::MatrixXd*> rhs;
  other.visit([&](std::string_view, const Eigen::MatrixXd& m) { rhs.push_back(&m); });
  std::size_t k = 0;
  visit([&](std::string_view, Eigen::MatrixXd& m) { m += s * *rhs[k++]; });
}

void Parameters::scale(double factor) {
  visit([&](std::string_view, Eigen::MatrixXd& m) { m *= factor; });
}

ScoringModel init_model(const ModelConfig& config, std::uint64_t seed) {
  ScoringModel model{config, Parameters::zeros(config), FeatureNormalizer{}};
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Eigen::MatrixXd& m, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Column-major traversal keeps the draw order tied to storage order.
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  };
  auto fill_lstm = [&](LstmParams& p) {
    const auto fan_in = static_cast<double>(p.w_input.cols());
    fill(p.w_input, fan_in);
    fill(p.w_recurrent, static_cast<double>(p.w_recurrent.cols()));
    fill(p.bias, fan_in);
  };
  auto& p = model.params;
  fill(p.embedding, 1.0);
  fill(p.ff_weight, static_cast<double>(config.embed_dim));
  fill(p.ff_bias, static_cast<double>(config.embed_dim));
  fill_lstm(p.cue_fwd);
  fill_lstm(p.cue_bwd);
  fill(p.utt_weight, static_cast<double>(config.utt_dim));
  fill(p.utt_bias, static_cast<double>(config.utt_dim));
  fill_lstm(p.fuse_fwd);
  fill_lstm(p.fuse_bwd);
  fill(p.fluency_weight, static_cast<double>(config.model_dim()));
  fill(p.fluency_bias, static_cast<double>(config.model_dim()));
  fill(p.prosody_weight, static_cast<double>(config.model_dim()));
  fill(p.prosody_bias, static_cast<double>(config.model_dim()));
  return model;
}

}  // namespace cuescore
