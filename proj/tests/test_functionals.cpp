#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cuescore/functionals.hpp"
#include "random_frames.hpp"

using namespace cuescore;

namespace {

FrameFeatures from_flags(const std::vector<int>& flags, const std::vector<double>& st = {}) {
  FrameFeatures f;
  for (std::size_t t = 0; t < flags.size(); ++t) {
    const bool v = flags[t] != 0;
    f.loudness.push_back(1.0);
    f.alpha_ratio_db.push_back(0.0);
    f.f0_semitones.push_back(v ? (st.empty() ? 30.0 : st[t]) : 0.0);
    f.jitter_local.push_back(0.0);
    f.voiced.push_back(v ? 1 : 0);
  }
  return f;
}

FrameFeatures reversed(FrameFeatures f) {
  std::reverse(f.loudness.begin(), f.loudness.end());
  std::reverse(f.alpha_ratio_db.begin(), f.alpha_ratio_db.end());
  std::reverse(f.f0_semitones.begin(), f.f0_semitones.end());
  std::reverse(f.jitter_local.begin(), f.jitter_local.end());
  std::reverse(f.voiced.begin(), f.voiced.end());
  return f;
}

}  // namespace

TEST_CASE("voicing segments") {
  using S = VoicingSegment;
  CHECK(segment_voicing(from_flags({1, 1, 0, 0, 0, 1})) ==
        std::vector<S>{{true, 0, 1}, {false, 2, 4}, {true, 5, 5}});
  CHECK(segment_voicing(from_flags({1, 1, 1, 1})) == std::vector<S>{{true, 0, 3}});
  CHECK(segment_voicing(from_flags({1, 0, 1, 0})).size() == 4);
  for (const auto& s : segment_voicing(from_flags({1, 0, 1, 0}))) CHECK(s.num_frames() == 1);
}

TEST_CASE("segments tile every frame once") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FrameFeatures f = testing_support::random_frame_features(seed);
    std::size_t next = 0;
    const auto segs = segment_voicing(f);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      REQUIRE(segs[i].start_frame == next);
      if (i > 0) REQUIRE(segs[i].voiced != segs[i - 1].voiced);
      next = segs[i].end_frame + 1;
    }
    REQUIRE(next == f.size());
  }
}

TEST_CASE("pitch slopes between extrema") {
  const PitchSlopes s = pitch_slopes(from_flags({1, 1, 1, 1, 1}, {30, 31, 32, 31, 30}));
  REQUIRE(s.rising.size() == 1);
  REQUIRE(s.falling.size() == 1);
  CHECK(s.rising[0] == doctest::Approx(100.0));
  CHECK(s.falling[0] == doctest::Approx(-100.0));

  const PitchSlopes flat = pitch_slopes(from_flags({1, 1, 1, 1}, {30, 30, 30, 30}));
  CHECK(flat.rising.empty());
  CHECK(flat.falling.empty());

  const PitchSlopes none = pitch_slopes(from_flags({0, 0, 0}));
  CHECK(none.rising.empty());
  CHECK(none.falling.empty());

  // Separate voiced segments never share a piece.
  const PitchSlopes split = pitch_slopes(from_flags({1, 1, 0, 1, 1}, {30, 31, 0, 20, 21}));
  CHECK(split.rising.size() == 2);
  CHECK(split.falling.empty());
}

TEST_CASE("functionals on an all-unvoiced utterance") {
  const UtteranceFunctionals u = compute_functionals(from_flags(std::vector<int>(37, 0)));
  const auto a = u.to_array();
  for (std::size_t k = 0; k < 9; ++k) CHECK(a[k] == 0.0);
  CHECK(u.unvoiced_seg_mean_s == doctest::Approx(0.37));
  CHECK(u.unvoiced_seg_std_s == 0.0);
  CHECK(u.voiced_seg_mean_s == 0.0);
}

TEST_CASE("pitch statistics over voiced frames") {
  const UtteranceFunctionals u = compute_functionals(from_flags({1, 0, 1}, {30, 0, 40}));
  CHECK(u.pitch_mean_st == doctest::Approx(35.0));
  CHECK(u.pitch_std_st == doctest::Approx(5.0));
  CHECK(u.pitch_p50_st == doctest::Approx(35.0));
  CHECK(u.pitch_p20_st == doctest::Approx(32.0));
  CHECK(u.pitch_p80_st == doctest::Approx(38.0));
}

TEST_CASE("segment statistics") {
  std::vector<int> flags(10, 1);
  flags.insert(flags.end(), 20, 0);
  flags.insert(flags.end(), 10, 1);
  const UtteranceFunctionals u = compute_functionals(from_flags(flags));
  CHECK(u.voiced_seg_mean_s == doctest::Approx(0.10));
  CHECK(u.voiced_seg_std_s == doctest::Approx(0.0));
  CHECK(u.unvoiced_seg_mean_s == doctest::Approx(0.20));
}

TEST_CASE("helpers") {
  CHECK(mean_of({}) == 0.0);
  CHECK(population_std({}) == 0.0);
  CHECK(population_std({4.0}) == 0.0);
  CHECK(percentile({}, 50.0) == 0.0);
  CHECK(percentile({5.0, 1.0, 3.0}, 50.0) == 3.0);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 20.0) == doctest::Approx(1.8));
}

TEST_CASE("functional invariants on random frames") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const FrameFeatures f = testing_support::random_frame_features(seed);
    const UtteranceFunctionals u = compute_functionals(f);
    for (double v : u.to_array()) REQUIRE(std::isfinite(v));
    REQUIRE(u.pitch_p20_st <= u.pitch_p50_st);
    REQUIRE(u.pitch_p50_st <= u.pitch_p80_st);
    REQUIRE(u.voiced_seg_mean_s >= 0.0);
    REQUIRE(u.unvoiced_seg_mean_s >= 0.0);
    for (double s : pitch_slopes(f).rising) REQUIRE(s > 0.0);
    for (double s : pitch_slopes(f).falling) REQUIRE(s < 0.0);
    REQUIRE(UtteranceFunctionals::from_matrix(u.to_matrix()).to_matrix() == u.to_matrix());
  }
}

TEST_CASE("pitch-shift equivariance and time reversal") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FrameFeatures f = testing_support::random_frame_features(seed);
    const UtteranceFunctionals u = compute_functionals(f);

    FrameFeatures shifted = f;
    const double k = 3.0;
    for (std::size_t t = 0; t < f.size(); ++t)
      if (f.voiced[t]) shifted.f0_semitones[t] += k;
    const UtteranceFunctionals s = compute_functionals(shifted);
    const bool any_voiced = std::count(f.voiced.begin(), f.voiced.end(), 1) > 0;
    const double expected_shift = any_voiced ? k : 0.0;
    CHECK(s.pitch_mean_st - u.pitch_mean_st == doctest::Approx(expected_shift).epsilon(1e-12));
    CHECK(s.pitch_p20_st - u.pitch_p20_st == doctest::Approx(expected_shift).epsilon(1e-12));
    CHECK(s.pitch_p50_st - u.pitch_p50_st == doctest::Approx(expected_shift).epsilon(1e-12));
    CHECK(s.pitch_p80_st - u.pitch_p80_st == doctest::Approx(expected_shift).epsilon(1e-12));
    CHECK(std::abs(s.pitch_std_st - u.pitch_std_st) <= 1e-9);
    CHECK(std::abs(s.rise_slope_mean - u.rise_slope_mean) <= 1e-9);
    CHECK(std::abs(s.fall_slope_std - u.fall_slope_std) <= 1e-9);
    CHECK(s.voiced_seg_mean_s == u.voiced_seg_mean_s);

    const UtteranceFunctionals r = compute_functionals(reversed(f));
    CHECK(std::abs(r.rise_slope_mean + u.fall_slope_mean) <= 1e-9);
    CHECK(std::abs(r.fall_slope_mean + u.rise_slope_mean) <= 1e-9);
    CHECK(std::abs(r.rise_slope_std - u.fall_slope_std) <= 1e-9);
    CHECK(std::abs(r.fall_slope_std - u.rise_slope_std) <= 1e-9);
    CHECK(r.voiced_seg_mean_s == doctest::Approx(u.voiced_seg_mean_s).epsilon(1e-12));
    CHECK(r.unvoiced_seg_std_s == doctest::Approx(u.unvoiced_seg_std_s).epsilon(1e-12));
  }
}
