#include "cuescore/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "cuescore/error.hpp"

namespace cuescore {

namespace {

constexpr double kFrameSeconds = FrameGrid::kHopMs / 1000.0;

}  // namespace

std::array<double, kNumFunctionals> UtteranceFunctionals::to_array() const {
  return {pitch_mean_st,   pitch_std_st,   pitch_p20_st,    pitch_p50_st,      pitch_p80_st,
          rise_slope_mean, rise_slope_std, fall_slope_mean, fall_slope_std,    voiced_seg_mean_s,
          voiced_seg_std_s, unvoiced_seg_mean_s, unvoiced_seg_std_s};
}

UtteranceFunctionals UtteranceFunctionals::from_array(const std::array<double, kNumFunctionals>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12]};
}

DenseMatrix UtteranceFunctionals::to_matrix() const {
  DenseMatrix m(1, kNumFunctionals);
  const auto v = to_array();
  for (std::size_t i = 0; i < kNumFunctionals; ++i) m(0, i) = static_cast<float>(v[i]);
  return m;
}

UtteranceFunctionals UtteranceFunctionals::from_matrix(const DenseMatrix& m) {
  if (m.rows() != 1 || m.cols() != kNumFunctionals) throw ShapeError("functionals matrix must be 1x13");
  std::array<double, kNumFunctionals> v{};
  for (std::size_t i = 0; i < kNumFunctionals; ++i) v[i] = m(0, i);
  return from_array(v);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

std::vector<VoicingSegment> segment_voicing(const FrameFeatures& frames) {
  std::vector<VoicingSegment> segments;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const bool v = frames.voiced[t] != 0;
    if (segments.empty() || segments.back().voiced != v) {
      segments.push_back({v, t, t});
    } else {
      segments.back().end_frame = t;
    }
  }
  return segments;
}

PitchSlopes pitch_slopes(const FrameFeatures& frames) {
  PitchSlopes slopes;
  for (const auto& seg : segment_voicing(frames)) {
    if (!seg.voiced || seg.num_frames() < 2) continue;
    const double* st = frames.f0_semitones.data() + seg.start_frame;
    const std::size_t n = seg.num_frames();
    std::vector<std::size_t> cuts{0};
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const bool peak = st[i] > st[i - 1] && st[i] > st[i + 1];
      const bool trough = st[i] < st[i - 1] && st[i] < st[i + 1];
      if (peak || trough) cuts.push_back(i);
    }
    cuts.push_back(n - 1);
    for (std::size_t k = 1; k < cuts.size(); ++k) {
      const std::size_t a = cuts[k - 1], b = cuts[k];
      const double slope = (st[b] - st[a]) / (static_cast<double>(b - a) * kFrameSeconds);
      if (slope > 0.0) {
        slopes.rising.push_back(slope);
      } else if (slope < 0.0) {
        slopes.falling.push_back(slope);
      }
    }
  }
  return slopes;
}

UtteranceFunctionals compute_functionals(const FrameFeatures& frames) {
  std::vector<double> pitch;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames.voiced[t]) pitch.push_back(frames.f0_semitones[t]);
  }
  std::vector<double> voiced_s, unvoiced_s;
  for (const auto& seg : segment_voicing(frames)) {
    (seg.voiced ? voiced_s : unvoiced_s).push_back(static_cast<double>(seg.num_frames()) * kFrameSeconds);
  }
  const PitchSlopes slopes = pitch_slopes(frames);

  UtteranceFunctionals u;
  u.pitch_mean_st = mean_of(pitch);
  u.pitch_std_st = population_std(pitch);
  u.pitch_p20_st = percentile(pitch, 20.0);
  u.pitch_p50_st = percentile(pitch, 50.0);
  u.pitch_p80_st = percentile(pitch, 80.0);
  u.rise_slope_mean = mean_of(slopes.rising);
  u.rise_slope_std = population_std(slopes.rising);
  u.fall_slope_mean = mean_of(slopes.falling);
  u.fall_slope_std = population_std(slopes.falling);
  u.voiced_seg_mean_s = mean_of(voiced_s);
  u.voiced_seg_std_s = population_std(voiced_s);
  u.unvoiced_seg_mean_s = mean_of(unvoiced_s);
  u.unvoiced_seg_std_s = population_std(unvoiced_s);
  return u;
}

}  // namespace cuescore
