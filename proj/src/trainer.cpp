#include "cuescore/scoring/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "cuescore/error.hpp"
#include "cuescore/tsv_io.hpp"

namespace cuescore {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, std::size_t line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError(line, "bad value '" + value + "' for " + key);
  }
  return out;
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "lr") {
      c.lr = parse_number<double>(key, value, line_no);
    } else if (key == "batch") {
      c.batch = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "epochs") {
      c.epochs = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "patience") {
      c.patience = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value, line_no);
    } else if (key == "loss_weight_fluency") {
      c.loss_weights.fluency = parse_number<double>(key, value, line_no);
    } else if (key == "loss_weight_prosody") {
      c.loss_weights.prosody = parse_number<double>(key, value, line_no);
    } else if (key == "val_fraction") {
      c.val_fraction = parse_number<double>(key, value, line_no);
    } else if (key == "jobs") {
      c.jobs = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "hidden") {
      c.model.hidden = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "embed_dim") {
      c.model.embed_dim = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "ff_dim") {
      c.model.ff_dim = parse_number<std::size_t>(key, value, line_no);
    } else if (key == "duration_model") {
      c.duration_model = value;
    } else {
      throw ValidationError(line_no, "unknown config key '" + key + "'");
    }
  }
  if (c.batch == 0) throw ValidationError(0, "batch must be positive");
  if (c.lr < 0.0) throw ValidationError(0, "lr must be non-negative");
  if (c.val_fraction < 0.0 || c.val_fraction >= 1.0) throw ValidationError(0, "val_fraction must be in [0, 1)");
  if (c.model.hidden == 0 || c.model.embed_dim == 0 || c.model.ff_dim == 0) {
    throw ValidationError(0, "model widths must be positive");
  }
  if (c.jobs == 0) c.jobs = 1;
  return c;
}

TrainConfig read_train_config(const std::string& path) { return parse_train_config(read_text_file(path)); }

AdamOptimizer::AdamOptimizer(const ModelConfig& config, double lr, double beta1, double beta2, double epsilon)
    : m_(Parameters::zeros(config)),
      v_(Parameters::zeros(config)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void AdamOptimizer::step(Parameters& params, const Parameters& grad) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  std::vector<const Eigen::MatrixXd*> g;
  grad.visit([&](std::string_view, const Eigen::MatrixXd& t) { g.push_back(&t); });
  std::vector<Eigen::MatrixXd*> m, v;
  m_.visit([&](std::string_view, Eigen::MatrixXd& t) { m.push_back(&t); });
  v_.visit([&](std::string_view, Eigen::MatrixXd& t) { v.push_back(&t); });
  std::size_t k = 0;
  params.visit([&](std::string_view, Eigen::MatrixXd& p) {
    auto& mk = *m[k];
    auto& vk = *v[k];
    const auto& gk = *g[k];
    mk = beta1_ * mk + (1.0 - beta1_) * gk;
    vk = beta2_ * vk + (1.0 - beta2_) * gk.cwiseProduct(gk);
    p.array() -= lr_ * (mk.array() / correction1) / ((vk.array() / correction2).sqrt() + epsilon_);
    ++k;
  });
}

FeatureNormalizer fit_normalizer(std::span<const UtteranceInputs> data, std::span<const std::size_t> indices) {
  FeatureNormalizer norm;
  Eigen::VectorXd sum_n = Eigen::VectorXd::Zero(5), sq_n = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd sum_u = Eigen::VectorXd::Zero(kNumFunctionals), sq_u = Eigen::VectorXd::Zero(kNumFunctionals);
  double count_n = 0.0;
  for (std::size_t idx : indices) {
    for (const auto& r : data[idx].fusion) {
      Eigen::VectorXd v(5);
      v << r.gopd, r.pooled[0], r.pooled[1], r.pooled[2], r.pooled[3];
      sum_n += v;
      sq_n += v.cwiseProduct(v);
      count_n += 1.0;
    }
    const Eigen::Map<const Eigen::VectorXd> u(data[idx].utterance.data(), kNumFunctionals);
    sum_u += u;
    sq_u += u.cwiseProduct(u);
  }
  auto finish = [](const Eigen::VectorXd& sum, const Eigen::VectorXd& sq, double n, Eigen::VectorXd& mean,
                   Eigen::VectorXd& scale) {
    if (n <= 0.0) return;
    mean = sum / n;
    scale = (sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
    // Constant dimensions pass through centred but unscaled.
    for (Eigen::Index i = 0; i < scale.size(); ++i)
      if (!(scale(i) > 1e-8)) scale(i) = 1.0;
  };
  finish(sum_n, sq_n, count_n, norm.numeric_mean, norm.numeric_scale);
  finish(sum_u, sq_u, static_cast<double>(indices.size()), norm.utterance_mean, norm.utterance_scale);
  return norm;
}

double mean_loss(const ScoringModel& model, std::span<const UtteranceInputs> data,
                 std::span<const std::size_t> indices, LossWeights weights) {
  if (indices.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t idx : indices) {
    const auto& u = data[idx];
    total += loss(forward(u, model), u.fluency, u.prosody, weights);
  }
  return total / static_cast<double>(indices.size());
}

double batch_gradient(const ScoringModel& model, std::span<const UtteranceInputs> data,
                      std::span<const std::size_t> batch, LossWeights weights, std::size_t jobs,
                      Parameters& grad, std::vector<double>* losses) {
  if (batch.empty()) throw EmptyInputError("empty batch");
  grad = Parameters::zeros(model.config);
  jobs = std::max<std::size_t>(1, std::min(jobs, batch.size()));
  std::vector<Parameters> buffers(jobs, Parameters::zeros(model.config));
  std::vector<double> chunk_losses(jobs);
  double total = 0.0;
  for (std::size_t start = 0; start < batch.size(); start += jobs) {
    const std::size_t count = std::min(jobs, batch.size() - start);
    auto work = [&](std::size_t w) {
      buffers[w].set_zero();
      chunk_losses[w] = loss_and_gradient(data[batch[start + w]], model, weights, buffers[w]);
    };
    if (count == 1) {
      work(0);
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < count; ++w) threads.emplace_back(work, w);
    }
    for (std::size_t w = 0; w < count; ++w) {
      const double l = chunk_losses[w];
      if (!std::isfinite(l)) {
        throw TrainingError("non-finite loss on utterance '" + data[batch[start + w]].id + "'");
      }
      if (losses) losses->push_back(l);
      total += l;
      grad.add_scaled(buffers[w], 1.0);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  grad.scale(inv);
  return total * inv;
}

TrainResult train(std::span<const UtteranceInputs> data, const TrainConfig& config, const EpochCallback& on_epoch) {
  if (data.empty()) throw EmptyInputError("training set is empty");
  const std::size_t n = data.size();

  std::mt19937_64 split_rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), split_rng);
  std::size_t n_val = static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(n)));
  if (n_val == 0 && n >= 2 && config.val_fraction > 0.0) n_val = 1;

  TrainResult result;
  result.val_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(result.val_indices.begin(), result.val_indices.end());
  std::sort(result.train_indices.begin(), result.train_indices.end());
  // Without a validation split, early stopping watches the training loss.
  const auto& monitor = result.val_indices.empty() ? result.train_indices : result.val_indices;

  ScoringModel model = init_model(config.model, config.seed);
  model.normalizer = fit_normalizer(data, result.train_indices);
  AdamOptimizer adam(config.model, config.lr, config.beta1, config.beta2, config.adam_epsilon);
  std::mt19937_64 shuffle_rng(config.seed + 1);

  result.model = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::vector<std::size_t> epoch_order = result.train_indices;
  Parameters grad;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(epoch_order.begin(), epoch_order.end(), shuffle_rng);
    std::vector<double> losses;
    for (std::size_t start = 0; start < epoch_order.size(); start += config.batch) {
      const std::size_t end = std::min(epoch_order.size(), start + config.batch);
      const std::span<const std::size_t> batch(epoch_order.data() + start, end - start);
      batch_gradient(model, data, batch, config.loss_weights, config.jobs, grad, &losses);
      adam.step(model.params, grad);
      if (!model.params.all_finite()) {
        throw TrainingError(fmt::format("non-finite parameter after step {} (epoch {})", adam.steps(), epoch));
      }
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
    record.val_loss = mean_loss(model, data, monitor, config.loss_weights);
    if (!std::isfinite(record.val_loss)) throw TrainingError(fmt::format("non-finite validation loss at epoch {}", epoch));
    result.history.push_back(record);
    if (on_epoch) on_epoch(record, model);

    if (record.val_loss < best_val) {
      best_val = record.val_loss;
      result.best_epoch = epoch;
      result.model = model;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

std::string format_history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const auto& r : history) out += fmt::format("{},{},{}\n", r.epoch, r.train_loss, r.val_loss);
  return out;
}

}  // namespace cuescore
