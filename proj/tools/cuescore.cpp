// cuescore command-line front end.
//
// Exit codes:
//   0  success
//   1  usage error or any other failure
//   2  I/O error (missing, unreadable or unwritable file)
//   3  malformed or unsupported input (format, validation, inventory, shape)
//   4  infeasible alignment (fewer frames than phones)
//   5  empty or too-short input
//   6  training diverged (non-finite loss or parameters)
//
// Data goes to stdout; diagnostics go to stderr as a single line.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cuescore/aligner.hpp"
#include "cuescore/assembly.hpp"
#include "cuescore/duration_model.hpp"
#include "cuescore/error.hpp"
#include "cuescore/functionals.hpp"
#include "cuescore/lld.hpp"
#include "cuescore/manifest.hpp"
#include "cuescore/matrix.hpp"
#include "cuescore/metrics.hpp"
#include "cuescore/phonemes.hpp"
#include "cuescore/pipeline.hpp"
#include "cuescore/scoring/checkpoint.hpp"
#include "cuescore/scoring/network.hpp"
#include "cuescore/scoring/trainer.hpp"
#include "cuescore/synth.hpp"
#include "cuescore/tsv_io.hpp"
#include "cuescore/wav.hpp"

namespace fs = std::filesystem;
using namespace cuescore;

namespace {

enum ExitCode : int {
  kOk = 0,
  kGeneral = 1,
  kIo = 2,
  kFormat = 3,
  kInfeasible = 4,
  kEmpty = 5,
  kTraining = 6,
};

std::vector<std::string> phones_argument(const std::string& text) {
  auto phones = parse_phone_string(text);
  if (phones.empty()) throw ValidationError(0, "phone string is empty");
  return phones;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

// ---- extract ----

struct ExtractArgs {
  std::string wav, out;
};

int run_extract(const ExtractArgs& a) {
  const AudioBuffer audio = load_wav(a.wav);
  const FrameFeatures frames = extract_frame_features(audio);
  const UtteranceFunctionals fn = compute_functionals(frames);
  write_matrix(a.out + ".lld.mtx", frames.to_matrix());
  write_matrix(a.out + ".functionals.mtx", fn.to_matrix());
  std::cout << fmt::format("frames\t{}\n", frames.size());
  for (std::size_t k = 0; k < kNumFunctionals; ++k) {
    std::cout << fmt::format("{}\t{}\n", UtteranceFunctionals::kNames[k], fn.to_array()[k]);
  }
  return kOk;
}

// ---- align ----

struct AlignArgs {
  std::string posteriors, phones, out;
};

int run_align(const AlignArgs& a) {
  const DenseMatrix post = read_matrix(a.posteriors);
  const auto phones = phones_argument(a.phones);
  const AlignmentResult r = dtw_align(post, phones);
  if (a.out.empty()) {
    std::cout << format_alignment(r.spans);
    std::cerr << fmt::format("log_score\t{}\n", r.log_score);
  } else {
    write_alignment(a.out, r.spans);
    std::cout << fmt::format("log_score\t{}\n", r.log_score);
  }
  return kOk;
}

// ---- fit-durations ----

struct FitArgs {
  std::string alignments, out;
};

int run_fit_durations(const FitArgs& a) {
  if (!fs::is_directory(a.alignments)) throw IoError("no such directory: " + a.alignments);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.alignments)) {
    if (e.is_regular_file() && e.path().extension() == ".tsv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  DurationFitter fitter;
  for (const auto& f : files) fitter.add(spans_to_durations(read_alignment(f)));
  const DurationModel model = fitter.finish();
  write_or_print(a.out, format_duration_model(model));
  std::cerr << fmt::format("fitted {} phones from {} files\n", model.phones().size(), files.size());
  return kOk;
}

// ---- gopd ----

struct GopdArgs {
  std::string alignment, durations;
};

int run_gopd(const GopdArgs& a) {
  const Alignment al = read_alignment(a.alignment);
  const DurationModel model = read_duration_model(a.durations);
  const auto scores = gopd_vector(al, model);
  std::string out = "phone\tduration_ms\tgopd\n";
  const auto durations = spans_to_durations(al);
  for (std::size_t i = 0; i < al.size(); ++i) {
    out += fmt::format("{}\t{}\t{}\n", durations[i].phone, durations[i].duration_ms, scores[i]);
  }
  std::cout << out;
  return kOk;
}

// ---- assemble ----

struct AssembleArgs {
  std::string wav, posteriors, phones, durations, out;
};

int run_assemble(const AssembleArgs& a) {
  const auto phones = phones_argument(a.phones);
  const UtteranceAnalysis an =
      analyze_utterance(load_wav(a.wav), read_matrix(a.posteriors), phones, read_duration_model(a.durations));
  write_matrix(a.out + ".numeric.mtx", fusion_numeric_matrix(an.fusion));
  write_matrix(a.out + ".phones.mtx", fusion_phone_matrix(an.fusion));
  write_matrix(a.out + ".functionals.mtx", an.functionals.to_matrix());
  write_alignment(a.out + ".alignment.tsv", an.alignment.spans);
  std::cout << fmt::format("phones\t{}\nframes\t{}\n", an.fusion.size(), an.frames.size());
  return kOk;
}

// ---- train ----

struct TrainArgs {
  std::string manifest, config, out, history, durations;
  std::size_t jobs = 1;
};

DurationModel durations_for(const std::string& flag, const TrainConfig& cfg, const fs::path& config_path) {
  if (!flag.empty()) return read_duration_model(flag);
  if (cfg.duration_model.empty()) throw ValidationError(0, "no duration model: pass --durations or set duration_model");
  fs::path p = cfg.duration_model;
  if (p.is_relative()) p = config_path.parent_path() / p;
  return read_duration_model(p);
}

int run_train(const TrainArgs& a) {
  TrainConfig cfg = read_train_config(a.config);
  cfg.jobs = a.jobs;
  const auto entries = read_manifest(a.manifest);
  if (entries.empty()) throw EmptyInputError("manifest has no utterances");
  const DurationModel durations = durations_for(a.durations, cfg, a.config);
  const auto data = prepare_manifest(entries, durations, a.jobs);
  const TrainResult result = train(data, cfg, [](const EpochRecord& r, const ScoringModel&) {
    std::cerr << fmt::format("epoch {} train_loss {:.6f} val_loss {:.6f}\n", r.epoch, r.train_loss, r.val_loss);
  });
  write_checkpoint(a.out, result.model);
  const std::string history = format_history_csv(result.history);
  if (a.history.empty()) {
    std::cout << history;
  } else {
    write_text_file(a.history, history);
  }
  std::cerr << fmt::format("best epoch {}\n", result.best_epoch);
  return kOk;
}

// ---- score ----

struct ScoreArgs {
  std::string checkpoint, manifest, durations, wav, posteriors, context, phones, out;
  std::size_t jobs = 1;
};

int run_score(const ScoreArgs& a) {
  const ScoringModel model = read_checkpoint(a.checkpoint);
  const DurationModel durations = read_duration_model(a.durations);
  std::vector<UtteranceInputs> data;
  if (!a.manifest.empty()) {
    const auto entries = read_manifest(a.manifest);
    if (entries.empty()) throw EmptyInputError("manifest has no utterances");
    data = prepare_manifest(entries, durations, a.jobs);
  } else {
    if (a.wav.empty() || a.posteriors.empty() || a.context.empty() || a.phones.empty()) {
      throw CLI::ValidationError("score needs --manifest, or --wav, --posteriors, --context and --phones");
    }
    UtteranceManifestEntry e;
    e.id = fs::path(a.wav).stem().string();
    e.wav_path = a.wav;
    e.posterior_path = a.posteriors;
    e.ct_path = a.context;
    e.phones = phones_argument(a.phones);
    data.push_back(prepare_utterance(e, durations));
  }
  std::vector<std::string> rows(data.size());
  // Forward passes are independent; rows keep input order.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < data.size();) {
      const ScoreDistribution s = forward(data[i], model);
      rows[i] = fmt::format("{},{},{}\n", data[i].id, predict_score(s.fluency), predict_score(s.prosody));
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(a.jobs, data.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
  }
  std::string out = "id,fluency,prosody\n";
  for (const auto& r : rows) out += r;
  write_or_print(a.out, out);
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::vector<std::string> preds;
  std::string gold;
};

using ScoreTable = std::map<std::string, std::pair<double, double>>;

ScoreTable read_score_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  ScoreTable table;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("id,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 3) throw ValidationError(line_no, path + ": expected id,fluency,prosody");
    try {
      std::size_t used_f = 0, used_p = 0;
      const double f = std::stod(fields[1], &used_f);
      const double p = std::stod(fields[2], &used_p);
      if (used_f != fields[1].size() || used_p != fields[2].size()) throw std::invalid_argument("trailing");
      if (!table.emplace(fields[0], std::pair{f, p}).second) {
        throw ValidationError(line_no, path + ": duplicate id " + fields[0]);
      }
    } catch (const std::logic_error&) {
      throw ValidationError(line_no, path + ": score is not a number");
    }
  }
  if (table.empty()) throw EmptyInputError(path + ": no scores");
  return table;
}

int run_eval(const EvalArgs& a) {
  const ScoreTable gold = read_score_csv(a.gold);
  double sum_f = 0.0, sum_p = 0.0;
  std::cout << "run\tfluency_pcc\tprosody_pcc\n";
  for (std::size_t k = 0; k < a.preds.size(); ++k) {
    const ScoreTable pred = read_score_csv(a.preds[k]);
    std::vector<double> pf, pp, gf, gp;
    for (const auto& [id, g] : gold) {
      const auto it = pred.find(id);
      if (it == pred.end()) throw ValidationError(0, a.preds[k] + ": missing prediction for " + id);
      pf.push_back(it->second.first);
      pp.push_back(it->second.second);
      gf.push_back(g.first);
      gp.push_back(g.second);
    }
    const PccResult rf = pcc(pf, gf), rp = pcc(pp, gp);
    if (rf.constant_prediction) std::cerr << fmt::format("warning: {}: constant fluency predictions\n", a.preds[k]);
    if (rp.constant_prediction) std::cerr << fmt::format("warning: {}: constant prosody predictions\n", a.preds[k]);
    std::cout << fmt::format("{}\t{:.6f}\t{:.6f}\n", k + 1, rf.r, rp.r);
    sum_f += rf.r;
    sum_p += rp.r;
  }
  if (a.preds.size() > 1) {
    const double n = static_cast<double>(a.preds.size());
    std::cout << fmt::format("mean\t{:.6f}\t{:.6f}\n", sum_f / n, sum_p / n);
  }
  return kOk;
}

// ---- synth ----

struct SynthArgs {
  std::string out;
  SyntheticSpec spec;
  std::size_t jobs = 1;
};

int run_synth(const SynthArgs& a) {
  write_synthetic_corpus(a.spec, a.out, a.jobs);
  std::cerr << fmt::format("wrote {} utterances to {}\n", a.spec.n_utterances, a.out);
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const InfeasibleError*>(&e)) return kInfeasible;
  if (dynamic_cast<const EmptyInputError*>(&e) || dynamic_cast<const TooShortError*>(&e)) return kEmpty;
  if (dynamic_cast<const TrainingError*>(&e)) return kTraining;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const InventoryError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
      dynamic_cast<const ModelError*>(&e)) {
    return kFormat;
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  return kGeneral;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pronunciation fluency and prosody scoring from non-verbal cues"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Frame descriptors and utterance functionals of one WAV");
  extract->add_option("--wav", ex.wav, "16 kHz mono PCM16 WAV")->required();
  extract->add_option("--out", ex.out, "Output prefix; writes PREFIX.lld.mtx and PREFIX.functionals.mtx")->required();

  AlignArgs al;
  auto* align = app.add_subcommand("align", "Force-align canonical phones to log-posteriors");
  align->add_option("--posteriors", al.posteriors, "T x 41 log-posterior MTX1")->required();
  align->add_option("--phones", al.phones, "Space-separated canonical phones")->required();
  align->add_option("--out", al.out, "Alignment TSV (stdout when omitted; the score then goes to stderr)");

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit-durations", "Fit per-phone duration statistics from alignment TSVs");
  fitc->add_option("--alignments", fit.alignments, "Directory of *.tsv alignments")->required();
  fitc->add_option("--out", fit.out, "Duration model TSV (stdout when omitted)");

  GopdArgs gp;
  auto* gopdc = app.add_subcommand("gopd", "Per-phone duration log-likelihoods of an alignment");
  gopdc->add_option("--alignment", gp.alignment, "Alignment TSV")->required();
  gopdc->add_option("--durations", gp.durations, "Duration model TSV")->required();

  AssembleArgs as;
  auto* assemble = app.add_subcommand("assemble", "Phone-level network inputs for one utterance");
  assemble->add_option("--wav", as.wav)->required();
  assemble->add_option("--posteriors", as.posteriors)->required();
  assemble->add_option("--phones", as.phones, "Space-separated canonical phones")->required();
  assemble->add_option("--durations", as.durations, "Duration model TSV")->required();
  assemble->add_option("--out", as.out, "Output prefix")->required();

  TrainArgs tr;
  auto* trainc = app.add_subcommand("train", "Train the scoring network");
  trainc->add_option("--manifest", tr.manifest, "Utterance manifest (JSON lines)")->required();
  trainc->add_option("--config", tr.config, "key=value training config")->required();
  trainc->add_option("--out", tr.out, "Checkpoint path")->required();
  trainc->add_option("--history", tr.history, "History CSV (stdout when omitted)");
  trainc->add_option("--durations", tr.durations, "Duration model TSV; overrides duration_model in the config");
  trainc->add_option("--jobs", tr.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Expected fluency and prosody scores");
  score->add_option("--checkpoint", sc.checkpoint)->required();
  score->add_option("--durations", sc.durations, "Duration model TSV")->required();
  score->add_option("--manifest", sc.manifest, "Score every utterance of a manifest");
  score->add_option("--wav", sc.wav);
  score->add_option("--posteriors", sc.posteriors);
  score->add_option("--context", sc.context, "T x 1024 encoder output MTX1");
  score->add_option("--phones", sc.phones);
  score->add_option("--out", sc.out, "Prediction CSV (stdout when omitted)");
  score->add_option("--jobs", sc.jobs, "Worker threads")->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* evalc = app.add_subcommand("eval", "Pearson correlation of predictions against gold scores");
  evalc->add_option("--pred", ev.preds, "Prediction CSV; repeat for several runs")->required();
  evalc->add_option("--gold", ev.gold, "Gold CSV (id,fluency,prosody)")->required();

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--n", sy.spec.n_utterances, "Number of utterances")->check(CLI::PositiveNumber);
  synth->add_option("--seed", sy.spec.seed, "Generator seed");
  synth->add_option("--min-phones", sy.spec.min_phones)->check(CLI::PositiveNumber);
  synth->add_option("--max-phones", sy.spec.max_phones)->check(CLI::PositiveNumber);
  synth->add_option("--jobs", sy.jobs, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "cuescore: " << e.what() << "\n";
    return kGeneral;
  }

  try {
    if (*extract) return run_extract(ex);
    if (*align) return run_align(al);
    if (*fitc) return run_fit_durations(fit);
    if (*gopdc) return run_gopd(gp);
    if (*assemble) return run_assemble(as);
    if (*trainc) return run_train(tr);
    if (*score) return run_score(sc);
    if (*evalc) return run_eval(ev);
    if (*synth) return run_synth(sy);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "cuescore: " << e.what() << "\n";
    return kGeneral;
  } catch (const std::exception& e) {
    std::cerr << "cuescore: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kGeneral;
}
