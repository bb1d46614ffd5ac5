#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cuescore/aligner.hpp"
#include "cuescore/duration_model.hpp"
#include "cuescore/lld.hpp"
#include "cuescore/matrix.hpp"
#include "cuescore/wav.hpp"

namespace cuescore {

/// Parameters of the synthetic desk-scale corpus. A fixed seed gives a byte-identical corpus.
struct SyntheticSpec {
  std::size_t n_utterances = 64;
  std::uint64_t seed = 7;
  std::size_t min_phones = 4;
  std::size_t max_phones = 7;
  /// Upper bound of the per-utterance mean squared duration z-score; sets the fluency range.
  double max_duration_deviation = 10.5;
  /// Per-phone spread of z-scores around the utterance's elongation level.
  double duration_jitter = 0.2;
  /// Upper bound of the intended pitch standard deviation in semitones.
  double max_pitch_std_st = 5.0;
  /// Log-posterior margin of the true phone and the noise added to every logit.
  double posterior_peak = 4.0;
  double posterior_noise = 1.0;
  std::size_t context_dim = 1024;
  /// Native alignments used to fit the duration model.
  std::size_t native_files = 40;
  std::size_t native_spans_per_file = 40;
};

/// Generator-side Gaussian duration of one phone (ms).
DurationStats duration_generator(const std::string& phone);

/// clamp(round(10 + 2 * mean(log N(d) - log N(mu))), 0, 10) under the generator model;
/// 10 when every phone lasts exactly its generator mean.
int fluency_label(std::span<const PhoneDuration> durations);

/// clamp(round(2 * pitch_std_st), 0, 10).
int prosody_label(double pitch_std_st);

struct SyntheticUtterance {
  std::string id;
  std::vector<std::string> phones;
  Alignment truth;
  AudioBuffer audio;
  DenseMatrix log_posteriors;  // T x 41
  DenseMatrix context;         // ceil(T/2) x context_dim
  double pitch_std_st = 0.0;   // of the generated contour over voiced frames
  int fluency = 0;
  int prosody = 0;
};

/// Utterance `index` depends only on (seed, index) and the shape fields, not on n_utterances.
SyntheticUtterance synthesize_utterance(const SyntheticSpec& spec, std::size_t index);

/// Alignments of "native" speech with durations drawn from the generator model.
std::vector<Alignment> synthesize_native_alignments(const SyntheticSpec& spec);

/// Pseudo encoder output: each LLD frame through a fixed seeded projection and
/// tanh, then adjacent frames averaged to a 20 ms stride. Rows are positions.
DenseMatrix pseudo_context(const FrameFeatures& frames, std::size_t dim);

/// Writes wav/, posteriors/, context/, alignments/ (ground truth), native/,
/// durations.tsv, manifest.jsonl, gold.csv and train.cfg under `out_dir`.
void write_synthetic_corpus(const SyntheticSpec& spec, const std::filesystem::path& out_dir, std::size_t jobs = 1);

}  // namespace cuescore
