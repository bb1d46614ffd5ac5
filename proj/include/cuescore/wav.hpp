#pragma once

#include <filesystem>
#include <vector>

namespace cuescore {

inline constexpr int kSampleRateHz = 16000;

/// Mono waveform scaled into [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kSampleRateHz;

  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

/// Reads a RIFF/WAVE file holding PCM signed 16-bit mono audio at 16 kHz.
/// Samples are scaled by 1/32768. Anything else is rejected, never converted.
AudioBuffer load_wav(const std::filesystem::path& path);

/// Writes PCM16 mono. Samples are clamped to [-1, 1) and rounded to the nearest code.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

}  // namespace cuescore
