#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cuescore/aligner.hpp"

namespace cuescore {

inline constexpr double kDurationStdFloorMs = 5.0;
inline constexpr std::size_t kMinPhoneSamples = 10;
inline constexpr const char* kGlobalPhone = "__GLOBAL__";

struct DurationStats {
  double mean_ms = 0.0;
  double std_ms = kDurationStdFloorMs;
  std::size_t count = 0;

  friend bool operator==(const DurationStats&, const DurationStats&) = default;
};

/// Mergeable running moments (Welford / Chan) for one phone.
class DurationAccumulator {
 public:
  void add(double duration_ms);
  void merge(const DurationAccumulator& other);

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Unbiased (n-1) standard deviation; 0 for fewer than two samples.
  double sample_std() const;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Per-phone Gaussian duration distributions with a pooled fallback.
/// Phones with fewer than kMinPhoneSamples samples delegate to the global entry.
class DurationModel {
 public:
  void set_phone(const std::string& phone, DurationStats stats) { phones_[phone] = stats; }
  void set_global(DurationStats stats) { global_ = stats; }

  const std::map<std::string, DurationStats>& phones() const { return phones_; }
  const std::optional<DurationStats>& global() const { return global_; }

  /// The stats used to score `phone`: its own entry when it has enough samples,
  /// otherwise the global entry. Throws ModelError if neither exists.
  const DurationStats& resolve(const std::string& phone) const;

  bool delegates(const std::string& phone) const;

  friend bool operator==(const DurationModel&, const DurationModel&) = default;

 private:
  std::map<std::string, DurationStats> phones_;
  std::optional<DurationStats> global_;
};

/// Streaming fit; feed (phone, duration) pairs, then finish().
class DurationFitter {
 public:
  void add(const std::string& phone, double duration_ms);
  void add(std::span<const PhoneDuration> durations);
  void merge(const DurationFitter& other);

  /// Throws EmptyInputError if nothing was added.
  DurationModel finish() const;

 private:
  std::map<std::string, DurationAccumulator> per_phone_;
  DurationAccumulator pooled_;
};

DurationModel fit_durations(std::span<const PhoneDuration> samples);

/// Natural-log Gaussian density of a duration: -ln(sigma*sqrt(2*pi)) - (d-mu)^2/(2*sigma^2).
double gaussian_log_density(double duration_ms, const DurationStats& stats);

/// Goodness of phonemic duration for one phone occurrence.
double gopd(double duration_ms, const std::string& phone, const DurationModel& model);

std::vector<double> gopd_vector(const Alignment& alignment, const DurationModel& model);

}  // namespace cuescore
