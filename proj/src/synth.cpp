#include "cuescore/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "cuescore/error.hpp"
#include "cuescore/functionals.hpp"
#include "cuescore/manifest.hpp"
#include "cuescore/phonemes.hpp"
#include "cuescore/tsv_io.hpp"

namespace cuescore {

namespace {

constexpr std::uint64_t kContextProjectionSeed = 0x5eedc0de2024ULL;
constexpr std::size_t kArpabetCount = 39;

std::mt19937_64 utterance_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::vector<std::string> vowel_symbols() {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < kArpabetCount; ++k) {
    const auto s = PhonemeInventory::symbol(k);
    if (PhonemeInventory::is_vowel(s)) out.emplace_back(s);
  }
  return out;
}

std::vector<std::string> voiceless_symbols() {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < kArpabetCount; ++k) {
    const auto s = PhonemeInventory::symbol(k);
    if (!PhonemeInventory::is_voiced(s)) out.emplace_back(s);
  }
  return out;
}

std::size_t to_frames(double duration_ms) {
  return static_cast<std::size_t>(std::max(1.0, std::round(duration_ms / kHopMs)));
}

Alignment spans_from_frames(const std::vector<std::string>& phones, const std::vector<std::size_t>& frames) {
  Alignment spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < phones.size(); ++i) {
    spans.push_back({phones[i], start, start + frames[i] - 1});
    start += frames[i];
  }
  return spans;
}

/// Frame-indexed phone lookup for a tiled alignment.
std::vector<std::size_t> frame_owner(const Alignment& spans) {
  std::vector<std::size_t> owner(covered_frames(spans));
  for (std::size_t i = 0; i < spans.size(); ++i)
    for (std::size_t t = spans[i].start_frame; t <= spans[i].end_frame; ++t) owner[t] = i;
  return owner;
}

}  // namespace

DurationStats duration_generator(const std::string& phone) {
  const std::size_t k = PhonemeInventory::index(phone);
  if (PhonemeInventory::is_vowel(phone)) {
    return {100.0 + 3.0 * static_cast<double>(k % 9), 20.0 + 2.0 * static_cast<double>(k % 5), 0};
  }
  return {60.0 + 2.0 * static_cast<double>(k % 7), 12.0 + 2.0 * static_cast<double>(k % 4), 0};
}

int fluency_label(std::span<const PhoneDuration> durations) {
  if (durations.empty()) throw EmptyInputError("fluency label needs at least one phone");
  double deviation = 0.0;
  for (const auto& d : durations) {
    const DurationStats g = duration_generator(d.phone);
    deviation += gaussian_log_density(d.duration_ms, g) - gaussian_log_density(g.mean_ms, g);
  }
  deviation /= static_cast<double>(durations.size());
  return static_cast<int>(std::clamp(std::round(10.0 + 2.0 * deviation), 0.0, 10.0));
}

int prosody_label(double pitch_std_st) {
  return static_cast<int>(std::clamp(std::round(2.0 * pitch_std_st), 0.0, 10.0));
}

DenseMatrix pseudo_context(const FrameFeatures& frames, std::size_t dim) {
  constexpr std::size_t kIn = 5;
  std::mt19937_64 rng(kContextProjectionSeed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(kIn)));
  std::vector<double> weights(dim * kIn), bias(dim);
  for (auto& w : weights) w = normal(rng);
  for (auto& b : bias) b = 0.3 * normal(rng);

  const std::size_t n = frames.size();
  std::vector<double> projected(n * dim);
  for (std::size_t t = 0; t < n; ++t) {
    const double x[kIn] = {std::log1p(frames.loudness[t]) - 3.0, frames.alpha_ratio_db[t] / 10.0,
                           frames.f0_semitones[t] / 40.0, 20.0 * frames.jitter_local[t],
                           frames.voiced[t] ? 1.0 : -1.0};
    for (std::size_t d = 0; d < dim; ++d) {
      double a = bias[d];
      for (std::size_t k = 0; k < kIn; ++k) a += weights[d * kIn + k] * x[k];
      projected[t * dim + d] = std::tanh(a);
    }
  }
  const std::size_t rows = (n + 1) / 2;
  DenseMatrix out(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t a = 2 * r, b = std::min(2 * r + 1, n - 1);
    for (std::size_t d = 0; d < dim; ++d) {
      out(r, d) = static_cast<float>(0.5 * (projected[a * dim + d] + projected[b * dim + d]));
    }
  }
  return out;
}

SyntheticUtterance synthesize_utterance(const SyntheticSpec& spec, std::size_t index) {
  if (spec.min_phones < 1 || spec.max_phones < spec.min_phones) throw DomainError("bad phone-count range");
  auto rng = utterance_rng(spec.seed, 1, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  static const auto consonants = voiceless_symbols();
  static const auto vowels = vowel_symbols();

  SyntheticUtterance u;
  u.id = fmt::format("utt{:04d}", index);
  const std::size_t n_phones =
      spec.min_phones + static_cast<std::size_t>(unit(rng) * static_cast<double>(spec.max_phones - spec.min_phones + 1));
  // Voiceless onsets alternate with vowels, so every voicing run is exactly one phone.
  for (std::size_t i = 0; i < std::min(n_phones, spec.max_phones); ++i) {
    const auto& pool = (i % 2 == 0) ? consonants : vowels;
    u.phones.push_back(pool[static_cast<std::size_t>(unit(rng) * static_cast<double>(pool.size())) % pool.size()]);
  }

  // Elongation level: mean squared z-score uniform in [0, max], so labels spread evenly.
  const double level = std::sqrt(unit(rng) * spec.max_duration_deviation);
  std::vector<std::size_t> frames;
  std::vector<PhoneDuration> durations;
  for (const auto& p : u.phones) {
    const DurationStats g = duration_generator(p);
    const double z = level + spec.duration_jitter * normal(rng);
    frames.push_back(to_frames(g.mean_ms + z * g.std_ms));
    durations.push_back({p, static_cast<double>(frames.back()) * kHopMs});
  }
  u.truth = spans_from_frames(u.phones, frames);
  u.fluency = fluency_label(durations);
  const std::size_t num_frames = covered_frames(u.truth);
  const auto owner = frame_owner(u.truth);

  // Pitch contour: one sinusoidal cycle laid over the voiced frames only, so
  // the voiced-frame standard deviation equals the target exactly. Voiceless
  // frames hold the last voiced value.
  const double base_st = hz_to_semitones(100.0 + 100.0 * unit(rng));
  const double target_std = unit(rng) * spec.max_pitch_std_st;
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  std::size_t num_voiced = 0;
  for (std::size_t t = 0; t < num_frames; ++t) num_voiced += PhonemeInventory::is_voiced(u.phones[owner[t]]);
  std::vector<double> contour(num_frames, base_st);
  std::vector<double> voiced_st;
  for (std::size_t t = 0, j = 0; t < num_frames; ++t) {
    if (PhonemeInventory::is_voiced(u.phones[owner[t]])) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j++) / static_cast<double>(num_voiced) + phase;
      contour[t] = base_st + target_std * std::numbers::sqrt2 * std::sin(angle);
      voiced_st.push_back(contour[t]);
    } else if (t > 0) {
      contour[t] = contour[t - 1];
    }
  }
  u.pitch_std_st = population_std(voiced_st);
  u.prosody = prosody_label(u.pitch_std_st);

  // Waveform: harmonic source on voiced phones, faint noise on voiceless ones.
  const std::size_t n_samples = FrameGrid::samples_for_frames(num_frames);
  u.audio.samples.resize(n_samples);
  const FrameGrid grid;
  const double centre_offset = 0.5 * static_cast<double>(grid.window_samples);
  double theta = 0.0;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double pos = (static_cast<double>(n) - centre_offset) / static_cast<double>(grid.hop_samples);
    const auto t = static_cast<std::size_t>(std::clamp(std::round(pos), 0.0, static_cast<double>(num_frames - 1)));
    const double frac_pos = std::clamp(pos, 0.0, static_cast<double>(num_frames - 1));
    const auto t0 = static_cast<std::size_t>(std::floor(frac_pos));
    const std::size_t t1 = std::min(t0 + 1, num_frames - 1);
    const double w = frac_pos - static_cast<double>(t0);
    const double st = (1.0 - w) * contour[t0] + w * contour[t1];
    const double f0 = kSemitoneReferenceHz * std::exp2(st / 12.0);
    theta += 2.0 * std::numbers::pi * f0 / kSampleRateHz;
    if (PhonemeInventory::is_voiced(u.phones[owner[t]])) {
      u.audio.samples[n] = 0.3 * (std::sin(theta) + 0.5 * std::sin(2.0 * theta) + 0.25 * std::sin(3.0 * theta));
    } else {
      u.audio.samples[n] = 0.01 * normal(rng);
    }
  }
  // Quantize exactly as the WAV writer does so in-memory and on-disk audio agree.
  for (auto& s : u.audio.samples) {
    s = std::clamp(std::nearbyint(std::clamp(s, -1.0, 1.0) * 32768.0), -32768.0, 32767.0) / 32768.0;
  }

  // Near-one-hot log-posteriors consistent with the true segmentation.
  u.log_posteriors = DenseMatrix(num_frames, kNumPhones);
  std::vector<double> logits(kNumPhones);
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (auto& l : logits) l = spec.posterior_noise * normal(rng);
    logits[PhonemeInventory::index(u.phones[owner[t]])] += spec.posterior_peak;
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - peak);
    const double lse = peak + std::log(sum);
    for (std::size_t k = 0; k < kNumPhones; ++k) u.log_posteriors(t, k) = static_cast<float>(logits[k] - lse);
  }

  u.context = pseudo_context(extract_frame_features(u.audio), spec.context_dim);
  return u;
}

std::vector<Alignment> synthesize_native_alignments(const SyntheticSpec& spec) {
  std::vector<Alignment> out;
  for (std::size_t f = 0; f < spec.native_files; ++f) {
    auto rng = utterance_rng(spec.seed, 2, f);
    std::uniform_int_distribution<std::size_t> pick(0, kArpabetCount - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::string> phones;
    std::vector<std::size_t> frames;
    for (std::size_t i = 0; i < spec.native_spans_per_file; ++i) {
      const std::string p(PhonemeInventory::symbol(pick(rng)));
      const DurationStats g = duration_generator(p);
      phones.push_back(p);
      frames.push_back(to_frames(g.mean_ms + g.std_ms * normal(rng)));
    }
    out.push_back(spans_from_frames(phones, frames));
  }
  return out;
}

void write_synthetic_corpus(const SyntheticSpec& spec, const std::filesystem::path& out_dir, std::size_t jobs) {
  namespace fs = std::filesystem;
  if (spec.n_utterances < 1) throw DomainError("synthetic corpus needs at least one utterance");
  for (const char* sub : {"wav", "posteriors", "context", "alignments", "native"}) fs::create_directories(out_dir / sub);

  DurationFitter fitter;
  const auto native = synthesize_native_alignments(spec);
  for (std::size_t f = 0; f < native.size(); ++f) {
    write_alignment(out_dir / "native" / fmt::format("native{:04d}.tsv", f), native[f]);
    fitter.add(spans_to_durations(native[f]));
  }
  write_duration_model(out_dir / "durations.tsv", fitter.finish());

  std::vector<UtteranceManifestEntry> entries(spec.n_utterances);
  std::vector<std::string> gold(spec.n_utterances);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(spec.n_utterances);
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < spec.n_utterances;) {
      try {
        const SyntheticUtterance u = synthesize_utterance(spec, i);
        write_wav(out_dir / "wav" / (u.id + ".wav"), u.audio);
        write_matrix(out_dir / "posteriors" / (u.id + ".mtx"), u.log_posteriors);
        write_matrix(out_dir / "context" / (u.id + ".mtx"), u.context);
        write_alignment(out_dir / "alignments" / (u.id + ".tsv"), u.truth);
        entries[i] = {u.id, fs::path("wav") / (u.id + ".wav"), fs::path("context") / (u.id + ".mtx"),
                      fs::path("posteriors") / (u.id + ".mtx"), u.phones, u.fluency, u.prosody};
        gold[i] = fmt::format("{},{},{}\n", u.id, u.fluency, u.prosody);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, spec.n_utterances));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  write_manifest(out_dir / "manifest.jsonl", entries);
  std::string gold_csv = "id,fluency,prosody\n";
  for (const auto& g : gold) gold_csv += g;
  write_text_file(out_dir / "gold.csv", gold_csv);
  write_text_file(out_dir / "train.cfg",
                  "# Training recipe for this corpus\n"
                  "lr=1e-4\nbatch=32\nepochs=50\npatience=2\nseed=1\n"
                  "loss_weight_fluency=0.5\nloss_weight_prosody=0.5\nval_fraction=0.1\n"
                  "duration_model=durations.tsv\n");
}

}  // namespace cuescore
