#include <doctest.h>

#include <cmath>

#include "cuescore/error.hpp"
#include "cuescore/pipeline.hpp"
#include "cuescore/scoring/trainer.hpp"
#include "cuescore/synth.hpp"
#include "cuescore/tsv_io.hpp"
#include "support/temp_dir.hpp"

using namespace cuescore;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_utterances = 6;
  s.context_dim = 8;
  s.native_files = 10;
  return s;
}

}  // namespace

TEST_CASE("manifest to network inputs") {
  testing_support::TempDir dir("pipeline");
  const auto spec = small_spec();
  write_synthetic_corpus(spec, dir.path());
  const auto entries = read_manifest(dir / "manifest.jsonl");
  const auto durations = read_duration_model(dir / "durations.tsv");

  const auto serial = prepare_manifest(entries, durations, 1);
  const auto parallel = prepare_manifest(entries, durations, 4);
  REQUIRE(serial.size() == entries.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    const auto u = synthesize_utterance(spec, i);
    CAPTURE(u.id);
    CHECK(serial[i].id == u.id);
    CHECK(serial[i].fusion == parallel[i].fusion);
    CHECK(serial[i].context == parallel[i].context);
    CHECK(serial[i].fusion.size() == u.phones.size());
    CHECK(serial[i].context.rows() == 8);
    CHECK(serial[i].context.cols() == static_cast<Eigen::Index>(u.context.rows()));
    CHECK(serial[i].fluency == u.fluency);
    CHECK(serial[i].prosody == u.prosody);
    for (std::size_t k = 0; k < u.phones.size(); ++k) {
      CHECK(serial[i].fusion[k].phone_index == PhonemeInventory::index(u.phones[k]));
      CHECK(std::isfinite(serial[i].fusion[k].gopd));
    }
  }
}

TEST_CASE("analysis recovers the generated segmentation") {
  const auto spec = small_spec();
  const auto u = synthesize_utterance(spec, 2);
  DurationModel model;
  model.set_global({100.0, 30.0, 100});
  const auto a = analyze_utterance(u.audio, u.log_posteriors, u.phones, model);
  CHECK(a.alignment.spans == u.truth);
  CHECK(a.gopd.size() == u.phones.size());
  CHECK(a.frames.size() == u.log_posteriors.rows());
  CHECK(a.functionals.pitch_std_st > 0.0);
}

TEST_CASE("frame count mismatch and missing files") {
  const auto spec = small_spec();
  const auto u = synthesize_utterance(spec, 0);
  DurationModel model;
  model.set_global({100.0, 30.0, 100});
  DenseMatrix shorter(u.log_posteriors.rows() - 1, kNumPhones);
  for (std::size_t r = 0; r < shorter.rows(); ++r)
    for (std::size_t c = 0; c < kNumPhones; ++c) shorter(r, c) = u.log_posteriors(r, c);
  CHECK_THROWS_AS(analyze_utterance(u.audio, shorter, u.phones, model), ShapeError);

  UtteranceManifestEntry e;
  e.id = "ghost";
  e.wav_path = "/nonexistent/ghost.wav";
  e.posterior_path = "/nonexistent/ghost.mtx";
  e.ct_path = "/nonexistent/ghost.ct.mtx";
  e.phones = {"AA"};
  const std::vector<UtteranceManifestEntry> entries = {e};
  CHECK_THROWS_AS(prepare_manifest(entries, model, 2), IoError);
}

TEST_CASE("small model trains end to end on a synthetic corpus") {
  testing_support::TempDir dir("pipeline-train");
  auto spec = small_spec();
  spec.n_utterances = 10;
  write_synthetic_corpus(spec, dir.path());
  const auto entries = read_manifest(dir / "manifest.jsonl");
  const auto data = prepare_manifest(entries, read_duration_model(dir / "durations.tsv"));
  auto cfg = read_train_config((dir / "train.cfg").string());
  cfg.model.hidden = 4;
  cfg.model.embed_dim = 5;
  cfg.model.ff_dim = 3;
  cfg.epochs = 3;
  const auto result = train(data, cfg);
  CHECK(result.history.size() >= 1);
  for (const auto& u : data) {
    const auto s = forward(u, result.model);
    CHECK(std::abs(s.fluency.sum() - 1.0) <= 1e-9);
    const double f = predict_score(s.prosody);
    CHECK(f >= 0.0);
    CHECK(f <= 10.0);
  }
}
