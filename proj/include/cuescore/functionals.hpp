#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "cuescore/lld.hpp"
#include "cuescore/matrix.hpp"

namespace cuescore {

inline constexpr std::size_t kNumFunctionals = 13;

/// Utterance-level pitch and voicing statistics. Slopes are in semitones per
/// second; segment durations in seconds. Field order is the serialization order.
struct UtteranceFunctionals {
  double pitch_mean_st = 0.0;
  double pitch_std_st = 0.0;
  double pitch_p20_st = 0.0;
  double pitch_p50_st = 0.0;
  double pitch_p80_st = 0.0;
  double rise_slope_mean = 0.0;
  double rise_slope_std = 0.0;
  double fall_slope_mean = 0.0;
  double fall_slope_std = 0.0;
  double voiced_seg_mean_s = 0.0;
  double voiced_seg_std_s = 0.0;
  double unvoiced_seg_mean_s = 0.0;
  double unvoiced_seg_std_s = 0.0;

  static constexpr std::array<std::string_view, kNumFunctionals> kNames = {
      "pitch_mean_st",   "pitch_std_st",      "pitch_p20_st",     "pitch_p50_st",     "pitch_p80_st",
      "rise_slope_mean", "rise_slope_std",    "fall_slope_mean",  "fall_slope_std",   "voiced_seg_mean_s",
      "voiced_seg_std_s", "unvoiced_seg_mean_s", "unvoiced_seg_std_s"};

  std::array<double, kNumFunctionals> to_array() const;
  static UtteranceFunctionals from_array(const std::array<double, kNumFunctionals>& v);

  /// 1 x 13 matrix in field order.
  DenseMatrix to_matrix() const;
  static UtteranceFunctionals from_matrix(const DenseMatrix& m);
};

struct VoicingSegment {
  bool voiced = false;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;  // inclusive

  std::size_t num_frames() const { return end_frame - start_frame + 1; }
  friend bool operator==(const VoicingSegment&, const VoicingSegment&) = default;
};

struct PitchSlopes {
  std::vector<double> rising;
  std::vector<double> falling;
};

/// Maximal runs of constant voicing, in order, covering every frame once.
std::vector<VoicingSegment> segment_voicing(const FrameFeatures& frames);

/// Piecewise slopes of the semitone contour between strict local extrema, per voiced segment.
PitchSlopes pitch_slopes(const FrameFeatures& frames);

UtteranceFunctionals compute_functionals(const FrameFeatures& frames);

// Statistics helpers; every one returns 0 on an empty input.
double mean_of(const std::vector<double>& v);
double population_std(const std::vector<double>& v);
/// Linear-interpolated percentile, p in [0, 100].
double percentile(std::vector<double> v, double p);

}  // namespace cuescore
