#include "cuescore/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "cuescore/error.hpp"

namespace cuescore {

UtteranceAnalysis analyze_utterance(const AudioBuffer& audio, const DenseMatrix& log_posteriors,
                                    std::span<const std::string> phones, const DurationModel& durations) {
  UtteranceAnalysis a;
  a.frames = extract_frame_features(audio);
  if (a.frames.size() != log_posteriors.rows()) {
    throw ShapeError("audio yields " + std::to_string(a.frames.size()) + " frames but posteriors have " +
                     std::to_string(log_posteriors.rows()));
  }
  a.functionals = compute_functionals(a.frames);
  a.alignment = dtw_align(log_posteriors, phones);
  a.gopd = gopd_vector(a.alignment.spans, durations);
  const auto pooled = pool_to_phonemes(a.frames, a.alignment.spans);
  a.fusion = build_fusion_input(pooled, a.gopd, phones);
  return a;
}

UtteranceInputs prepare_utterance(const UtteranceManifestEntry& entry, const DurationModel& durations) {
  const AudioBuffer audio = load_wav(entry.wav_path);
  const DenseMatrix posteriors = read_matrix(entry.posterior_path);
  const UtteranceAnalysis a = analyze_utterance(audio, posteriors, entry.phones, durations);
  UtteranceInputs in;
  in.id = entry.id;
  in.fusion = a.fusion;
  in.context = context_from_matrix(read_matrix(entry.ct_path));
  if (in.context.cols() == 0) throw ShapeError(entry.id + ": context matrix has no frames");
  in.utterance = a.functionals.to_array();
  in.fluency = entry.fluency;
  in.prosody = entry.prosody;
  return in;
}

std::vector<UtteranceInputs> prepare_manifest(std::span<const UtteranceManifestEntry> entries,
                                              const DurationModel& durations, std::size_t jobs) {
  std::vector<UtteranceInputs> out(entries.size());
  jobs = std::max<std::size_t>(1, std::min(jobs, entries.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(entries.size());
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < entries.size();) {
      try {
        out[i] = prepare_utterance(entries[i], durations);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  // Report the earliest failing entry regardless of scheduling.
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

}  // namespace cuescore
