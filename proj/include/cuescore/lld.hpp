#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cuescore/matrix.hpp"
#include "cuescore/wav.hpp"

namespace cuescore {

/// 25 ms analysis windows every 10 ms. The hop matches the aligner's 10 ms
/// posterior frames, so LLD frame t and posterior row t describe the same audio.
struct FrameGrid {
  static constexpr double kWindowMs = 25.0;
  static constexpr double kHopMs = 10.0;

  std::size_t window_samples = 400;
  std::size_t hop_samples = 160;
  std::size_t num_frames = 0;

  /// Throws TooShortError when the signal is shorter than one window.
  static FrameGrid for_signal(std::size_t num_samples, int sample_rate_hz = kSampleRateHz);

  /// Number of samples a grid of `frames` frames needs.
  static std::size_t samples_for_frames(std::size_t frames);

  std::size_t frame_start(std::size_t t) const { return t * hop_samples; }
};

struct PitchTrack {
  std::vector<double> f0_hz;        // 0 when unvoiced
  std::vector<std::uint8_t> voiced;
};

/// Per-frame low-level descriptors. Unvoiced frames carry f0 0 and jitter 0.
struct FrameFeatures {
  std::vector<double> loudness;
  std::vector<double> alpha_ratio_db;
  std::vector<double> f0_semitones;
  std::vector<double> jitter_local;
  std::vector<std::uint8_t> voiced;

  std::size_t size() const { return voiced.size(); }

  /// frames x 5: loudness, alpha_db, f0_st, jitter, voiced (0/1).
  DenseMatrix to_matrix() const;
  static FrameFeatures from_matrix(const DenseMatrix& m);
};

inline constexpr std::size_t kMelBands = 26;
inline constexpr double kLoudnessExponent = 0.3;
inline constexpr double kAlphaRatioEpsilon = 1e-10;
inline constexpr double kVoicingThreshold = 0.45;
inline constexpr double kMinF0Hz = 55.0;
inline constexpr double kMaxF0Hz = 500.0;
inline constexpr double kSemitoneReferenceHz = 27.5;

/// Sum over 26 mel bands (20-8000 Hz) of band power^0.3, from a Hann-windowed power spectrum.
std::vector<double> compute_loudness(const AudioBuffer& audio, const FrameGrid& grid);

/// 10*log10((E[50,1000) + eps) / (E[1000,5000] + eps)) per frame.
std::vector<double> compute_alpha_ratio(const AudioBuffer& audio, const FrameGrid& grid);

/// Normalized-autocorrelation pitch tracker over 55-500 Hz with parabolic peak refinement.
PitchTrack estimate_f0(const AudioBuffer& audio, const FrameGrid& grid);

/// 12*log2(f0/27.5). Throws DomainError for f0 <= 0.
double hz_to_semitones(double f0_hz);

/// Local jitter from successive waveform peaks in a three-frame neighbourhood
/// of each voiced frame. 0 for unvoiced frames or fewer than 3 periods.
std::vector<double> compute_jitter(const AudioBuffer& audio, const FrameGrid& grid, const PitchTrack& pitch);

FrameFeatures extract_frame_features(const AudioBuffer& audio);

}  // namespace cuescore
