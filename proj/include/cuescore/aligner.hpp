#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cuescore/matrix.hpp"

namespace cuescore {

inline constexpr double kHopMs = 10.0;

/// One phone occupying frames [start_frame, end_frame], inclusive.
struct PhoneSpan {
  std::string phone;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;

  std::size_t num_frames() const { return end_frame - start_frame + 1; }
  friend bool operator==(const PhoneSpan&, const PhoneSpan&) = default;
};

/// Spans in canonical order, tiling frames 0..T-1 without gaps or overlap.
using Alignment = std::vector<PhoneSpan>;

struct AlignmentResult {
  Alignment spans;
  double log_score = 0.0;
};

struct PhoneDuration {
  std::string phone;
  double duration_ms = 0.0;
};

/// Checks the posterior matrix shape (T x 41) and finiteness. With
/// `require_normalized`, every row's logsumexp must be within 1e-3 of zero.
void validate_posteriors(const DenseMatrix& log_posteriors, bool require_normalized);

/// Forced alignment of a canonical phone sequence against frame log-posteriors.
///
/// Maximizes the summed log-posterior over every monotone segmentation that
/// gives each phone at least one frame:
///   dp[t][i] = lp[t][y_i] + max(dp[t-1][i], dp[t-1][i-1])
/// On ties the backtrace takes the advancing branch (i-1).
AlignmentResult dtw_align(const DenseMatrix& log_posteriors, std::span<const std::string> phones);

/// Throws ValidationError unless the spans tile [0, num_frames-1] in order.
void validate_alignment(const Alignment& alignment, std::size_t num_frames);

std::size_t covered_frames(const Alignment& alignment);

std::vector<PhoneDuration> spans_to_durations(const Alignment& alignment, double hop_ms = kHopMs);

}  // namespace cuescore
