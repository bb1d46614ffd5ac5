#include "cuescore/lld.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>

#include <fftw3.h>

#include "cuescore/error.hpp"

namespace cuescore {

namespace {

constexpr std::size_t kFftSize = 512;
constexpr std::size_t kNumBins = kFftSize / 2 + 1;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

/// One real-to-complex plan shared by every thread; fftw_execute_dft_r2c is
/// reentrant on arrays allocated with the same alignment.
class RealFft {
 public:
  static const RealFft& instance() {
    static const RealFft fft;
    return fft;
  }

  void power_spectrum(const double* frame, std::size_t n, std::vector<double>& power) const {
    FftwBuffer<double> in(fftw_alloc_real(kFftSize));
    FftwBuffer<fftw_complex> out(fftw_alloc_complex(kNumBins));
    std::fill(in.get(), in.get() + kFftSize, 0.0);
    std::copy(frame, frame + n, in.get());
    fftw_execute_dft_r2c(plan_, in.get(), out.get());
    power.resize(kNumBins);
    for (std::size_t k = 0; k < kNumBins; ++k) {
      power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    }
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

 private:
  RealFft() {
    FftwBuffer<double> in(fftw_alloc_real(kFftSize));
    FftwBuffer<fftw_complex> out(fftw_alloc_complex(kNumBins));
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), in.get(), out.get(), FFTW_ESTIMATE);
  }
  ~RealFft() { fftw_destroy_plan(plan_); }

  fftw_plan plan_ = nullptr;
};

double bin_hz(std::size_t k) { return static_cast<double>(k) * kSampleRateHz / static_cast<double>(kFftSize); }

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular mel filterbank, kMelBands x kNumBins.
const std::vector<std::vector<double>>& mel_filterbank() {
  static const auto bank = [] {
    const double lo = hz_to_mel(20.0);
    const double hi = hz_to_mel(8000.0);
    std::vector<double> edges(kMelBands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kMelBands + 1));
    }
    std::vector<std::vector<double>> weights(kMelBands, std::vector<double>(kNumBins, 0.0));
    for (std::size_t b = 0; b < kMelBands; ++b) {
      const double left = edges[b], centre = edges[b + 1], right = edges[b + 2];
      for (std::size_t k = 0; k < kNumBins; ++k) {
        const double f = bin_hz(k);
        if (f > left && f <= centre) {
          weights[b][k] = (f - left) / (centre - left);
        } else if (f > centre && f < right) {
          weights[b][k] = (right - f) / (right - centre);
        }
      }
    }
    return weights;
  }();
  return bank;
}

constexpr std::size_t kWindowSamples = 400;

const std::vector<double>& hann_window() {
  static const auto window = [] {
    constexpr std::size_t n = kWindowSamples;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return w;
  }();
  return window;
}

/// Hann-windowed power spectra, one vector of kNumBins per frame.
std::vector<std::vector<double>> power_spectra(const AudioBuffer& audio, const FrameGrid& grid) {
  if (audio.samples.size() < grid.window_samples) {
    throw TooShortError("signal shorter than one 25 ms analysis window");
  }
  const auto& window = hann_window();
  const auto& fft = RealFft::instance();
  std::vector<std::vector<double>> spectra(grid.num_frames);
  std::vector<double> frame(grid.window_samples);
  for (std::size_t t = 0; t < grid.num_frames; ++t) {
    const double* src = audio.samples.data() + grid.frame_start(t);
    for (std::size_t i = 0; i < grid.window_samples; ++i) frame[i] = src[i] * window[i];
    fft.power_spectrum(frame.data(), frame.size(), spectra[t]);
  }
  return spectra;
}

double loudness_from_spectrum(const std::vector<double>& power) {
  double loudness = 0.0;
  for (const auto& band : mel_filterbank()) {
    double band_power = 0.0;
    for (std::size_t k = 0; k < kNumBins; ++k) band_power += band[k] * power[k];
    loudness += std::pow(band_power, kLoudnessExponent);
  }
  return loudness;
}

double alpha_ratio_from_spectrum(const std::vector<double>& power) {
  double low = 0.0, high = 0.0;
  for (std::size_t k = 0; k < kNumBins; ++k) {
    const double f = bin_hz(k);
    if (f >= 50.0 && f < 1000.0) {
      low += power[k];
    } else if (f >= 1000.0 && f <= 5000.0) {
      high += power[k];
    }
  }
  return 10.0 * std::log10((low + kAlphaRatioEpsilon) / (high + kAlphaRatioEpsilon));
}

struct LagRange {
  std::size_t min_lag;
  std::size_t max_lag;
};

LagRange pitch_lags(int sample_rate_hz) {
  return {static_cast<std::size_t>(std::ceil(sample_rate_hz / kMaxF0Hz)),
          static_cast<std::size_t>(std::floor(sample_rate_hz / kMinF0Hz))};
}

/// Parabolic vertex offset in [-0.5, 0.5] for three samples around a peak.
double parabolic_offset(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

FrameGrid FrameGrid::for_signal(std::size_t num_samples, int sample_rate_hz) {
  if (sample_rate_hz != kSampleRateHz) throw UnsupportedFormatError("frame grid requires 16 kHz audio");
  FrameGrid grid;
  if (num_samples < grid.window_samples) {
    throw TooShortError("signal of " + std::to_string(num_samples) + " samples is shorter than one 25 ms window");
  }
  grid.num_frames = (num_samples - grid.window_samples) / grid.hop_samples + 1;
  return grid;
}

std::size_t FrameGrid::samples_for_frames(std::size_t frames) {
  const FrameGrid grid;
  return frames == 0 ? 0 : grid.window_samples + (frames - 1) * grid.hop_samples;
}

DenseMatrix FrameFeatures::to_matrix() const {
  DenseMatrix m(size(), 5);
  for (std::size_t t = 0; t < size(); ++t) {
    m(t, 0) = static_cast<float>(loudness[t]);
    m(t, 1) = static_cast<float>(alpha_ratio_db[t]);
    m(t, 2) = static_cast<float>(f0_semitones[t]);
    m(t, 3) = static_cast<float>(jitter_local[t]);
    m(t, 4) = voiced[t] ? 1.0f : 0.0f;
  }
  return m;
}

FrameFeatures FrameFeatures::from_matrix(const DenseMatrix& m) {
  if (m.cols() != 5) throw ShapeError("frame feature matrix must have 5 columns");
  FrameFeatures f;
  for (std::size_t t = 0; t < m.rows(); ++t) {
    f.loudness.push_back(m(t, 0));
    f.alpha_ratio_db.push_back(m(t, 1));
    f.f0_semitones.push_back(m(t, 2));
    f.jitter_local.push_back(m(t, 3));
    f.voiced.push_back(m(t, 4) != 0.0f ? 1 : 0);
  }
  return f;
}

std::vector<double> compute_loudness(const AudioBuffer& audio, const FrameGrid& grid) {
  std::vector<double> out;
  for (const auto& spectrum : power_spectra(audio, grid)) out.push_back(loudness_from_spectrum(spectrum));
  return out;
}

std::vector<double> compute_alpha_ratio(const AudioBuffer& audio, const FrameGrid& grid) {
  std::vector<double> out;
  for (const auto& spectrum : power_spectra(audio, grid)) out.push_back(alpha_ratio_from_spectrum(spectrum));
  return out;
}

PitchTrack estimate_f0(const AudioBuffer& audio, const FrameGrid& grid) {
  if (audio.samples.size() < grid.window_samples) {
    throw TooShortError("signal shorter than one 25 ms analysis window");
  }
  const auto [min_lag, max_lag] = pitch_lags(audio.sample_rate_hz);
  const std::size_t n = grid.window_samples;
  PitchTrack track;
  track.f0_hz.assign(grid.num_frames, 0.0);
  track.voiced.assign(grid.num_frames, 0);

  std::vector<double> x(n);
  // r[lag] for lag in [min_lag-1, max_lag+1]; neighbours feed the parabola.
  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t t = 0; t < grid.num_frames; ++t) {
    const double* src = audio.samples.data() + grid.frame_start(t);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += src[i];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = src[i] - mean;

    for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
      double cross = 0.0, head = 0.0, tail = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) {
        cross += x[i] * x[i + lag];
        head += x[i] * x[i];
        tail += x[i + lag] * x[i + lag];
      }
      r[lag] = (head > 0.0 && tail > 0.0) ? cross / std::sqrt(head * tail) : 0.0;
    }

    double best_value = 0.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) best_value = std::max(best_value, r[lag]);
    }
    if (best_value <= 0.0) continue;
    // Shortest-lag peak that is nearly as strong as the strongest one; longer
    // lags repeat the same period and would report a subharmonic.
    std::size_t chosen = 0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= 0.9 * best_value) {
        chosen = lag;
        break;
      }
    }
    if (r[chosen] <= kVoicingThreshold) continue;
    const double lag = static_cast<double>(chosen) + parabolic_offset(r[chosen - 1], r[chosen], r[chosen + 1]);
    track.voiced[t] = 1;
    track.f0_hz[t] = audio.sample_rate_hz / lag;
  }
  return track;
}

double hz_to_semitones(double f0_hz) {
  if (!(f0_hz > 0.0)) throw DomainError("semitone conversion needs a positive frequency");
  return 12.0 * std::log2(f0_hz / kSemitoneReferenceHz);
}

namespace {

/// Index of the largest sample in [lo, hi) if it is a strict interior local maximum.
std::optional<std::size_t> local_peak(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  if (lo < 1) lo = 1;
  if (hi > x.size() - 1) hi = x.size() - 1;
  if (lo >= hi) return std::nullopt;
  const auto it = std::max_element(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
  const auto k = static_cast<std::size_t>(it - x.begin());
  if (x[k] > x[k - 1] && x[k] >= x[k + 1]) return k;
  return std::nullopt;
}

double refine_peak(const std::vector<double>& x, std::size_t k) {
  return static_cast<double>(k) + parabolic_offset(x[k - 1], x[k], x[k + 1]);
}

}  // namespace

std::vector<double> compute_jitter(const AudioBuffer& audio, const FrameGrid& grid, const PitchTrack& pitch) {
  std::vector<double> jitter(grid.num_frames, 0.0);
  const std::size_t total = audio.samples.size();
  for (std::size_t t = 0; t < grid.num_frames; ++t) {
    if (!pitch.voiced[t] || pitch.f0_hz[t] <= 0.0) continue;
    const std::size_t begin = grid.frame_start(t > 0 ? t - 1 : 0);
    const std::size_t end = std::min(total, grid.frame_start(t + 1) + grid.window_samples);
    std::vector<double> x(audio.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                          audio.samples.begin() + static_cast<std::ptrdiff_t>(end));
    const double period = audio.sample_rate_hz / pitch.f0_hz[t];
    const auto span = static_cast<std::size_t>(std::ceil(period));

    auto first = local_peak(x, 0, span + 1);
    if (!first) first = local_peak(x, span / 2, span / 2 + span + 1);
    if (!first) continue;

    std::vector<double> peaks{refine_peak(x, *first)};
    std::size_t k = *first;
    while (true) {
      const auto lo = k + static_cast<std::size_t>(std::floor(0.8 * period));
      const auto hi = k + static_cast<std::size_t>(std::ceil(1.2 * period)) + 1;
      if (hi > x.size() - 1) break;
      const auto next = local_peak(x, lo, hi);
      if (!next) break;
      k = *next;
      peaks.push_back(refine_peak(x, k));
    }
    if (peaks.size() < 4) continue;

    double sum_period = 0.0, sum_diff = 0.0;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
      const double p = peaks[i] - peaks[i - 1];
      sum_period += p;
      if (i >= 2) sum_diff += std::abs(p - (peaks[i - 1] - peaks[i - 2]));
    }
    const double num_periods = static_cast<double>(peaks.size() - 1);
    const double mean_diff = sum_diff / (num_periods - 1.0);
    const double mean_period = sum_period / num_periods;
    jitter[t] = std::clamp(mean_diff / mean_period, 0.0, 1.0);
  }
  return jitter;
}

FrameFeatures extract_frame_features(const AudioBuffer& audio) {
  const FrameGrid grid = FrameGrid::for_signal(audio.samples.size(), audio.sample_rate_hz);
  const auto spectra = power_spectra(audio, grid);
  const PitchTrack pitch = estimate_f0(audio, grid);
  FrameFeatures f;
  f.jitter_local = compute_jitter(audio, grid, pitch);
  f.voiced = pitch.voiced;
  for (std::size_t t = 0; t < grid.num_frames; ++t) {
    f.loudness.push_back(loudness_from_spectrum(spectra[t]));
    f.alpha_ratio_db.push_back(alpha_ratio_from_spectrum(spectra[t]));
    f.f0_semitones.push_back(pitch.voiced[t] ? hz_to_semitones(pitch.f0_hz[t]) : 0.0);
  }
  return f;
}

}  // namespace cuescore
