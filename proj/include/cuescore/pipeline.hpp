#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cuescore/aligner.hpp"
#include "cuescore/assembly.hpp"
#include "cuescore/duration_model.hpp"
#include "cuescore/functionals.hpp"
#include "cuescore/lld.hpp"
#include "cuescore/manifest.hpp"
#include "cuescore/scoring/network.hpp"
#include "cuescore/wav.hpp"

namespace cuescore {

/// Everything derived from one utterance's audio, posteriors and canonical phones.
struct UtteranceAnalysis {
  FrameFeatures frames;
  UtteranceFunctionals functionals;
  AlignmentResult alignment;
  std::vector<double> gopd;
  FusionInput fusion;
};

/// LLD extraction, functionals, forced alignment, GoPD and phone-level pooling.
/// Throws ShapeError when the audio and the posteriors disagree on frame count.
UtteranceAnalysis analyze_utterance(const AudioBuffer& audio, const DenseMatrix& log_posteriors,
                                    std::span<const std::string> phones, const DurationModel& durations);

/// Loads the files named by a manifest entry and builds the network inputs.
UtteranceInputs prepare_utterance(const UtteranceManifestEntry& entry, const DurationModel& durations);

/// prepare_utterance over a manifest; results keep manifest order for any `jobs`.
std::vector<UtteranceInputs> prepare_manifest(std::span<const UtteranceManifestEntry> entries,
                                              const DurationModel& durations, std::size_t jobs = 1);

}  // namespace cuescore
