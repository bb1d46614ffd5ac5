#include "cuescore/duration_model.hpp"

#include <cmath>
#include <numbers>

#include "cuescore/error.hpp"
#include "cuescore/phonemes.hpp"

namespace cuescore {

void DurationAccumulator::add(double duration_ms) {
  ++count_;
  const double delta = duration_ms - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (duration_ms - mean_);
}

void DurationAccumulator::merge(const DurationAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double n_a = static_cast<double>(count_);
  const double n_b = static_cast<double>(other.count_);
  const double n = n_a + n_b;
  const double delta = other.mean_ - mean_;
  mean_ += delta * n_b / n;
  m2_ += other.m2_ + delta * delta * n_a * n_b / n;
  count_ += other.count_;
}

double DurationAccumulator::sample_std() const {
  if (count_ < 2) return 0.0;
  return std::sqrt(std::max(0.0, m2_ / static_cast<double>(count_ - 1)));
}

const DurationStats& DurationModel::resolve(const std::string& phone) const {
  const auto it = phones_.find(phone);
  if (it != phones_.end() && it->second.count >= kMinPhoneSamples) return it->second;
  if (global_) return *global_;
  throw ModelError("duration model has no usable entry for '" + phone + "' and no global fallback");
}

bool DurationModel::delegates(const std::string& phone) const {
  const auto it = phones_.find(phone);
  return it == phones_.end() || it->second.count < kMinPhoneSamples;
}

void DurationFitter::add(const std::string& phone, double duration_ms) {
  per_phone_[phone].add(duration_ms);
  pooled_.add(duration_ms);
}

void DurationFitter::add(std::span<const PhoneDuration> durations) {
  for (const auto& d : durations) add(d.phone, d.duration_ms);
}

void DurationFitter::merge(const DurationFitter& other) {
  for (const auto& [phone, acc] : other.per_phone_) per_phone_[phone].merge(acc);
  pooled_.merge(other.pooled_);
}

namespace {

DurationStats to_stats(const DurationAccumulator& acc) {
  return {acc.mean(), std::max(acc.sample_std(), kDurationStdFloorMs), acc.count()};
}

}  // namespace

DurationModel DurationFitter::finish() const {
  if (pooled_.count() == 0) throw EmptyInputError("no duration samples to fit");
  DurationModel model;
  for (const auto& [phone, acc] : per_phone_) model.set_phone(phone, to_stats(acc));
  model.set_global(to_stats(pooled_));
  return model;
}

DurationModel fit_durations(std::span<const PhoneDuration> samples) {
  DurationFitter fitter;
  fitter.add(samples);
  return fitter.finish();
}

double gaussian_log_density(double duration_ms, const DurationStats& stats) {
  const double sigma = stats.std_ms;
  const double z = (duration_ms - stats.mean_ms) / sigma;
  return -std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) - 0.5 * z * z;
}

double gopd(double duration_ms, const std::string& phone, const DurationModel& model) {
  if (!(duration_ms > 0.0) || !std::isfinite(duration_ms)) {
    throw DomainError("duration must be positive, got " + std::to_string(duration_ms));
  }
  PhonemeInventory::index(phone);
  return gaussian_log_density(duration_ms, model.resolve(phone));
}

std::vector<double> gopd_vector(const Alignment& alignment, const DurationModel& model) {
  std::vector<double> out;
  out.reserve(alignment.size());
  for (const auto& d : spans_to_durations(alignment)) out.push_back(gopd(d.duration_ms, d.phone, model));
  return out;
}

}  // namespace cuescore
