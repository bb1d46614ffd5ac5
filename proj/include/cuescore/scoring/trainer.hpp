#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cuescore/scoring/model.hpp"
#include "cuescore/scoring/network.hpp"

namespace cuescore {

/// Training recipe. Parsed from a key=value file; every key is optional.
///   lr, batch, epochs, patience, seed, loss_weight_fluency, loss_weight_prosody,
///   val_fraction, jobs, hidden, embed_dim, ff_dim, duration_model
struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t batch = 32;
  std::size_t epochs = 50;
  std::size_t patience = 2;
  std::uint64_t seed = 1;
  LossWeights loss_weights;
  double val_fraction = 0.1;
  std::size_t jobs = 1;
  ModelConfig model;
  /// Duration model used to compute GoPD when features are built from a manifest.
  std::string duration_model;
};

TrainConfig parse_train_config(const std::string& text);
TrainConfig read_train_config(const std::string& path);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  ScoringModel model;  // best-validation parameters
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

/// Called after each epoch with the current (not best) model.
using EpochCallback = std::function<void(const EpochRecord&, const ScoringModel&)>;

/// Adam state for one parameter set.
class AdamOptimizer {
 public:
  AdamOptimizer(const ModelConfig& config, double lr, double beta1, double beta2, double epsilon);
  void step(Parameters& params, const Parameters& grad);
  std::size_t steps() const { return steps_; }

 private:
  Parameters m_, v_;
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t steps_ = 0;
};

/// Per-dimension mean and standard deviation over the selected utterances.
FeatureNormalizer fit_normalizer(std::span<const UtteranceInputs> data, std::span<const std::size_t> indices);

/// Mean loss over the selected utterances, sum-then-average.
double mean_loss(const ScoringModel& model, std::span<const UtteranceInputs> data,
                 std::span<const std::size_t> indices, LossWeights weights);

/// Mean gradient over a batch into `grad` (overwritten); returns the mean loss.
/// Per-utterance gradients are summed in index order whatever `jobs` is.
double batch_gradient(const ScoringModel& model, std::span<const UtteranceInputs> data,
                      std::span<const std::size_t> batch, LossWeights weights, std::size_t jobs,
                      Parameters& grad, std::vector<double>* losses = nullptr);

/// Deterministic given config.seed. The validation split is the first
/// floor(val_fraction * n) utterances (at least one when n >= 2) of a seeded
/// permutation; training stops when validation loss has not improved for
/// `patience` consecutive epochs.
TrainResult train(std::span<const UtteranceInputs> data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// "epoch,train_loss,val_loss" with round-trip precision.
std::string format_history_csv(const std::vector<EpochRecord>& history);

}  // namespace cuescore
