// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--only N]... [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cuescore/aligner.hpp"
#include "cuescore/duration_model.hpp"
#include "cuescore/functionals.hpp"
#include "cuescore/lld.hpp"
#include "cuescore/metrics.hpp"
#include "cuescore/phonemes.hpp"
#include "cuescore/pipeline.hpp"
#include "cuescore/scoring/checkpoint.hpp"
#include "cuescore/scoring/trainer.hpp"
#include "cuescore/synth.hpp"
#include "cuescore/tsv_io.hpp"
#include "oracles/dtw_bruteforce.hpp"
#include "oracles/finite_difference.hpp"
#include "random_frames.hpp"
#include "signals.hpp"
#include "support/temp_dir.hpp"
#include "tiny_model.hpp"

using namespace cuescore;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Criterion 1.
Outcome dtw_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> n01(0.0, 1.0);
  int mismatches = 0, bad_tiling = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const std::size_t t = std::uniform_int_distribution<std::size_t>(l, 8)(rng);
    std::vector<std::string> phones;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < l; ++i) {
      const std::size_t c = std::uniform_int_distribution<std::size_t>(0, kNumPhones - 1)(rng);
      cols.push_back(c);
      phones.emplace_back(PhonemeInventory::symbol(c));
    }
    DenseMatrix lp(t, kNumPhones);
    std::vector<std::vector<double>> sub(t, std::vector<double>(l));
    for (std::size_t r = 0; r < t; ++r) {
      for (std::size_t c = 0; c < kNumPhones; ++c) lp(r, c) = static_cast<float>(-3.0 + n01(rng));
      for (std::size_t i = 0; i < l; ++i) sub[r][i] = lp(r, cols[i]);
    }
    const auto got = dtw_align(lp, phones);
    const auto want = oracle::brute_force_align(sub);
    if (got.log_score != want.score) ++mismatches;
    try {
      validate_alignment(got.spans, t);
    } catch (const std::exception&) {
      ++bad_tiling;
    }
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && bad_tiling == 0 && elapsed < 5.0,
          fmt::format("100 trials, {} score mismatches, {} bad tilings, {:.3f} s", mismatches, bad_tiling, elapsed)};
}

// Criterion 2.
Outcome gradient_check() {
  const auto start = Clock::now();
  auto model = init_model(testing_support::tiny_config(8), 2024);
  const auto u = testing_support::random_inputs(2025, 3, 5, model.config.model_dim());
  const LossWeights w{0.5, 0.5};
  Parameters grad = Parameters::zeros(model.config);
  loss_and_gradient(u, model, w, grad);
  std::vector<const Eigen::MatrixXd*> grads;
  grad.visit([&](std::string_view, const Eigen::MatrixXd& g) { grads.push_back(&g); });

  std::mt19937_64 pick(7);
  std::size_t k = 0, tensors = 0, coords_total = 0;
  double worst = 0.0;
  std::string worst_name;
  model.params.visit([&](std::string_view name, Eigen::MatrixXd& p) {
    const Eigen::MatrixXd& g = *grads[k++];
    std::vector<Eigen::Index> coords;
    // The embedding gradient is nonzero only on rows of phones in the utterance.
    if (name == "embedding") {
      for (const auto& r : u.fusion)
        for (Eigen::Index c = 0; c < p.cols(); ++c) coords.push_back(c * p.rows() + static_cast<Eigen::Index>(r.phone_index));
    } else if (p.size() <= 10) {
      for (Eigen::Index i = 0; i < p.size(); ++i) coords.push_back(i);
    } else {
      std::uniform_int_distribution<Eigen::Index> d(0, p.size() - 1);
      for (int i = 0; i < 10; ++i) coords.push_back(d(pick));
    }
    for (Eigen::Index idx : coords) {
      const double numeric = oracle::central_difference(p.data()[idx], 1e-5, [&] {
        return loss(forward(u, model), u.fluency, u.prosody, w);
      });
      const double err = oracle::relative_error(g.data()[idx], numeric);
      if (err > worst) {
        worst = err;
        worst_name = std::string(name);
      }
    }
    ++tensors;
    coords_total += coords.size();
  });
  const double elapsed = seconds_since(start);
  // Tensors smaller than 10 are checked on every coordinate.
  return {worst <= 1e-3 && elapsed < 60.0,
          fmt::format("{} tensors, {} coordinates, worst relative error {:.2e} ({}), {:.2f} s", tensors, coords_total,
                      worst, worst_name, elapsed)};
}

// Criterion 3.
Outcome gopd_closed_form() {
  DurationModel model;
  const DurationStats stats{120.0, 17.0, 50};
  model.set_phone("AA", stats);
  const double at_mean = gopd(stats.mean_ms, "AA", model);
  const double closed = -std::log(stats.std_ms * std::sqrt(2.0 * std::numbers::pi));
  const double closed_err = std::abs(at_mean - closed);
  double sym_err = 0.0;
  for (double delta : {0.5, 3.0, 17.0, 40.0, 100.0}) {
    sym_err = std::max(sym_err, std::abs(gopd(stats.mean_ms + delta, "AA", model) -
                                         gopd(stats.mean_ms - delta, "AA", model)));
  }
  bool monotone = true;
  const std::vector<double> grid = {0.0, 5.0, 10.0, 20.0, 40.0};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    for (double sign : {1.0, -1.0}) {
      if (!(gopd(stats.mean_ms + sign * grid[i], "AA", model) < gopd(stats.mean_ms + sign * grid[i - 1], "AA", model)))
        monotone = false;
    }
  }
  return {closed_err <= 1e-9 && sym_err <= 1e-12 && monotone,
          fmt::format("|gopd(mu) - closed form| {:.1e}, symmetry error {:.1e}, monotone {}", closed_err, sym_err,
                      monotone)};
}

// Criterion 4.
Outcome duration_recovery() {
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> d(100.0, 20.0);
  std::vector<PhoneDuration> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back({"EH", d(rng)});
  const auto model = fit_durations(samples);
  const auto& s = model.phones().at("EH");
  return {s.mean_ms >= 98.0 && s.mean_ms <= 102.0 && s.std_ms >= 18.0 && s.std_ms <= 22.0,
          fmt::format("mean {:.3f} ms, std {:.3f} ms from 1000 samples", s.mean_ms, s.std_ms)};
}

std::vector<double> interior(const std::vector<double>& v) {
  return v.size() > 2 ? std::vector<double>(v.begin() + 1, v.end() - 1) : v;
}

// Criterion 5.
Outcome dsp_sanity() {
  std::vector<std::string> failures;
  const auto tone = extract_frame_features(signals::sine(220.0, 1.0));
  const auto pitch = estimate_f0(signals::sine(220.0, 1.0), FrameGrid::for_signal(16000));
  std::vector<double> f0, st;
  double worst_jitter = 0.0;
  for (std::size_t t = 0; t < tone.size(); ++t) {
    if (!tone.voiced[t]) continue;
    f0.push_back(pitch.f0_hz[t]);
    st.push_back(tone.f0_semitones[t]);
    worst_jitter = std::max(worst_jitter, tone.jitter_local[t]);
  }
  const double median_f0 = f0.empty() ? 0.0 : signals::median(f0);
  const double median_st = st.empty() ? 0.0 : signals::median(st);
  if (std::abs(median_f0 - 220.0) > 2.0) failures.push_back("f0");
  if (std::abs(median_st - 36.0) > 0.2) failures.push_back("semitones");
  if (worst_jitter > 0.005) failures.push_back("pure-tone jitter");

  const auto pulses = extract_frame_features(signals::alternating_pulse_train(120.0, 0.025, 0.5));
  std::vector<double> j;
  for (std::size_t t = 2; t + 2 < pulses.size(); ++t)
    if (pulses.voiced[t]) j.push_back(pulses.jitter_local[t]);
  const double median_j = j.empty() ? 0.0 : signals::median(j);
  if (std::abs(median_j - 0.05) > 0.2 * 0.05) failures.push_back("injected jitter");

  const auto low = interior(compute_alpha_ratio(signals::sine(200.0, 0.5), FrameGrid::for_signal(8000)));
  const auto high = interior(compute_alpha_ratio(signals::sine(3000.0, 0.5), FrameGrid::for_signal(8000)));
  const double low_min = *std::min_element(low.begin(), low.end());
  const double high_max = *std::max_element(high.begin(), high.end());
  if (low_min < 20.0) failures.push_back("200 Hz alpha");
  if (high_max > -20.0) failures.push_back("3 kHz alpha");

  const auto zero = extract_frame_features(signals::silence(1.0));
  bool all_zero = true;
  for (std::size_t t = 0; t < zero.size(); ++t) {
    all_zero = all_zero && zero.loudness[t] == 0.0 && zero.alpha_ratio_db[t] == 0.0 && zero.f0_semitones[t] == 0.0 &&
               zero.jitter_local[t] == 0.0 && zero.voiced[t] == 0;
  }
  if (!all_zero) failures.push_back("zero signal");

  std::string failed;
  for (const auto& f : failures) failed += (failed.empty() ? " failed: " : ", ") + f;
  return {failures.empty(),
          fmt::format("median f0 {:.3f} Hz, {:.4f} st, max jitter {:.5f}, injected 0.05 -> {:.4f}, alpha {:+.1f} / "
                      "{:+.1f} dB{}",
                      median_f0, median_st, worst_jitter, median_j, low_min, high_max, failed)};
}

FrameFeatures reversed(FrameFeatures f) {
  std::reverse(f.loudness.begin(), f.loudness.end());
  std::reverse(f.alpha_ratio_db.begin(), f.alpha_ratio_db.end());
  std::reverse(f.f0_semitones.begin(), f.f0_semitones.end());
  std::reverse(f.jitter_local.begin(), f.jitter_local.end());
  std::reverse(f.voiced.begin(), f.voiced.end());
  return f;
}

// Criterion 6.
Outcome functionals_laws() {
  double shift_err = 0.0, std_err = 0.0, swap_err = 0.0;
  const double k = 2.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto f = testing_support::random_frame_features(600 + seed);
    // Force at least one voiced frame so the shift is observable.
    f.voiced[0] = 1;
    if (f.f0_semitones[0] == 0.0) f.f0_semitones[0] = 35.0;
    const auto u = compute_functionals(f);
    auto shifted = f;
    for (std::size_t t = 0; t < f.size(); ++t)
      if (f.voiced[t]) shifted.f0_semitones[t] += k;
    const auto s = compute_functionals(shifted);
    for (double d : {s.pitch_mean_st - u.pitch_mean_st, s.pitch_p20_st - u.pitch_p20_st,
                     s.pitch_p50_st - u.pitch_p50_st, s.pitch_p80_st - u.pitch_p80_st})
      shift_err = std::max(shift_err, std::abs(d - k));
    std_err = std::max(std_err, std::abs(s.pitch_std_st - u.pitch_std_st));

    const auto r = compute_functionals(reversed(f));
    swap_err = std::max({swap_err, std::abs(r.rise_slope_mean + u.fall_slope_mean),
                         std::abs(r.fall_slope_mean + u.rise_slope_mean),
                         std::abs(r.rise_slope_std - u.fall_slope_std), std::abs(r.fall_slope_std - u.rise_slope_std)});
  }
  return {shift_err <= 1e-9 && std_err <= 1e-9 && swap_err <= 1e-9,
          fmt::format("20 seeds: shift error {:.1e}, std change {:.1e}, slope swap error {:.1e}", shift_err, std_err,
                      swap_err)};
}

// Criterion 8.
Outcome alignment_self_consistency() {
  SyntheticSpec spec;
  spec.n_utterances = 100;
  std::size_t total = 0, exact = 0;
  for (std::size_t i = 0; i < spec.n_utterances; ++i) {
    const auto u = synthesize_utterance(spec, i);
    const auto r = dtw_align(u.log_posteriors, u.phones);
    for (std::size_t k = 0; k < u.truth.size(); ++k) {
      ++total;
      exact += r.spans[k] == u.truth[k] ? 1 : 0;
    }
  }
  const double frac = static_cast<double>(exact) / static_cast<double>(total);
  return {frac >= 0.95, fmt::format("{} of {} spans recovered ({:.2f}%) over 100 utterances", exact, total, 100.0 * frac)};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return out;
}

struct Corpus {
  fs::path dir;
  std::vector<UtteranceInputs> data;
  TrainConfig config;
};

Corpus load_corpus(const fs::path& dir) {
  Corpus c;
  c.dir = dir;
  const auto entries = read_manifest(dir / "manifest.jsonl");
  c.config = read_train_config((dir / "train.cfg").string());
  c.data = prepare_manifest(entries, read_duration_model(dir / c.config.duration_model));
  return c;
}

struct LearnabilityReport {
  Outcome learn;
  Outcome validity;
};

// Criteria 7 and 10 share one training run.
LearnabilityReport learnability(const Corpus& corpus) {
  const TrainConfig& cfg = corpus.config;
  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < corpus.data.size(); i += 8) sample.push_back(i);

  double check_seconds = 0.0;
  std::size_t checked = 0, invalid = 0;
  double worst_sum = 0.0;
  auto on_epoch = [&](const EpochRecord& r, const ScoringModel& m) {
    const auto t0 = Clock::now();
    for (std::size_t i : sample) {
      const auto s = forward(corpus.data[i], m);
      for (const Eigen::VectorXd* p : {&s.fluency, &s.prosody}) {
        const double err = std::abs(p->sum() - 1.0);
        worst_sum = std::max(worst_sum, err);
        const double score = predict_score(*p);
        if (err > 1e-9 || !(p->minCoeff() > 0.0) || score < 0.0 || score > 10.0) ++invalid;
      }
      ++checked;
    }
    check_seconds += seconds_since(t0);
    std::cerr << fmt::format("  epoch {:2d}  train {:.4f}  val {:.4f}\n", r.epoch, r.train_loss, r.val_loss);
  };

  const auto start = Clock::now();
  const TrainResult result = train(corpus.data, cfg, on_epoch);
  const double train_seconds = seconds_since(start) - check_seconds;

  std::vector<double> pf, pp, gf, gp;
  for (const auto& u : corpus.data) {
    const auto s = forward(u, result.model);
    pf.push_back(predict_score(s.fluency));
    pp.push_back(predict_score(s.prosody));
    gf.push_back(u.fluency);
    gp.push_back(u.prosody);
  }
  // Training-set PCC over the utterances the optimizer saw.
  std::vector<double> tf, tp, tgf, tgp;
  for (std::size_t i : result.train_indices) {
    tf.push_back(pf[i]);
    tp.push_back(pp[i]);
    tgf.push_back(gf[i]);
    tgp.push_back(gp[i]);
  }
  const double pcc_f = pcc(tf, tgf).r;
  const double pcc_p = pcc(tp, tgp).r;
  const double first = result.history.front().train_loss;
  const double best = result.history.at(result.best_epoch - 1).train_loss;
  const double ratio = best / first;

  LearnabilityReport rep;
  rep.learn.pass = ratio <= 0.5 && pcc_f >= 0.9 && pcc_p >= 0.9 && train_seconds < 600.0;
  rep.learn.detail = fmt::format(
      "{} utterances ({} train / {} val), {} epochs run, best epoch {}: train loss {:.4f} / epoch-1 {:.4f} = {:.3f} "
      "(need <= 0.5), training-set PCC fluency {:.3f} prosody {:.3f} (need >= 0.9), {:.0f} s",
      corpus.data.size(), result.train_indices.size(), result.val_indices.size(), result.history.size(),
      result.best_epoch, best, first, ratio, pcc_f, pcc_p, train_seconds);
  rep.validity.pass = invalid == 0 && checked > 0;
  rep.validity.detail = fmt::format("{} epochs x {} sampled utterances, {} invalid heads, worst |sum - 1| {:.1e}",
                                    result.history.size(), sample.size(), invalid, worst_sum);
  return rep;
}

// Criterion 9.
Outcome determinism(const fs::path& work, const Corpus& corpus) {
  const SyntheticSpec spec;
  write_synthetic_corpus(spec, work / "again");
  const bool corpus_same = read_tree(corpus.dir) == read_tree(work / "again");

  TrainConfig cfg = corpus.config;
  cfg.epochs = 2;
  const auto a = train(corpus.data, cfg);
  const auto b = train(corpus.data, cfg);
  const bool history_same = a.history == b.history && format_history_csv(a.history) == format_history_csv(b.history);
  const bool ckpt_same = encode_checkpoint(a.model) == encode_checkpoint(b.model);
  return {corpus_same && history_same && ckpt_same,
          fmt::format("corpus {}, history {}, checkpoint {} (full-size model, 2 epochs per run)",
                      corpus_same ? "identical" : "DIFFERS", history_same ? "identical" : "DIFFERS",
                      ckpt_same ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-10"};
  std::vector<int> only;
  std::string work_dir;
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  app.add_option("--work", work_dir, "Keep the generated corpus here instead of a temporary directory");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());
  auto want = [&](int n) { return selected.empty() || selected.count(n) > 0; };

  int failures = 0;
  auto report = [&](int n, const char* name, const Outcome& o) {
    std::cout << fmt::format("criterion {:2d} {} {}: {}\n", n, o.pass ? "PASS" : "FAIL", name, o.detail) << std::flush;
    if (!o.pass) ++failures;
  };
  auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  if (want(1)) report(1, "dtw oracle equivalence", guarded(dtw_oracle));
  if (want(2)) report(2, "gradient correctness", guarded(gradient_check));
  if (want(3)) report(3, "gopd closed form", guarded(gopd_closed_form));
  if (want(4)) report(4, "duration-fit recovery", guarded(duration_recovery));
  if (want(5)) report(5, "dsp sanity", guarded(dsp_sanity));
  if (want(6)) report(6, "functionals laws", guarded(functionals_laws));

  std::optional<Outcome> validity;
  testing_support::TempDir temp("acceptance");
  const fs::path work = work_dir.empty() ? temp.path() : fs::path(work_dir);
  std::optional<Corpus> corpus;
  if (want(7) || want(9) || want(10)) {
    try {
      fs::create_directories(work);
      write_synthetic_corpus(SyntheticSpec{}, work / "corpus");
      corpus = load_corpus(work / "corpus");
    } catch (const std::exception& e) {
      const Outcome broken{false, std::string("corpus generation failed: ") + e.what()};
      for (int n : {7, 9, 10})
        if (want(n)) report(n, "synthetic corpus", broken);
    }
  }
  if (corpus && (want(7) || want(10))) {
    LearnabilityReport rep;
    try {
      rep = learnability(*corpus);
    } catch (const std::exception& e) {
      rep.learn = rep.validity = {false, std::string("exception: ") + e.what()};
    }
    if (want(7)) report(7, "end-to-end learnability", rep.learn);
    validity = rep.validity;
  }
  if (want(8)) report(8, "synthetic alignment self-consistency", guarded(alignment_self_consistency));
  if (corpus && want(9)) report(9, "determinism", guarded([&] { return determinism(work, *corpus); }));
  if (validity && want(10)) report(10, "distribution validity", *validity);

  std::cout << fmt::format("{} of {} criteria failed\n", failures, selected.empty() ? 10 : selected.size());
  return failures == 0 ? 0 : 1;
}
