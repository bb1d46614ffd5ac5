#include "cuescore/aligner.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "cuescore/error.hpp"
#include "cuescore/phonemes.hpp"

namespace cuescore {

void validate_posteriors(const DenseMatrix& log_posteriors, bool require_normalized) {
  if (log_posteriors.cols() != kNumPhones) {
    throw ShapeError("posterior matrix must have " + std::to_string(kNumPhones) + " columns, got " +
                     std::to_string(log_posteriors.cols()));
  }
  if (log_posteriors.rows() == 0) throw ShapeError("posterior matrix has no frames");
  for (std::size_t t = 0; t < log_posteriors.rows(); ++t) {
    const auto row = log_posteriors.row(t);
    double peak = -std::numeric_limits<double>::infinity();
    for (float v : row) {
      if (!std::isfinite(v)) throw ValidationError(0, "posterior frame " + std::to_string(t) + " is not finite");
      peak = std::max(peak, static_cast<double>(v));
    }
    if (require_normalized) {
      double sum = 0.0;
      for (float v : row) sum += std::exp(static_cast<double>(v) - peak);
      const double lse = peak + std::log(sum);
      if (std::abs(lse) > 1e-3) {
        throw ValidationError(0, "posterior frame " + std::to_string(t) + " is not normalized (logsumexp " +
                                     std::to_string(lse) + ")");
      }
    }
  }
}

AlignmentResult dtw_align(const DenseMatrix& log_posteriors, std::span<const std::string> phones) {
  const std::vector<std::size_t> columns = phone_indices(phones);
  validate_posteriors(log_posteriors, false);
  const std::size_t T = log_posteriors.rows();
  const std::size_t L = columns.size();
  if (L == 0) throw InfeasibleError("canonical phone sequence is empty");
  if (T < L) {
    throw InfeasibleError("cannot align " + std::to_string(L) + " phones to " + std::to_string(T) + " frames");
  }

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // advanced[t*L + i] records whether frame t entered phone i from phone i-1.
  std::vector<double> prev(L, kNegInf), cur(L, kNegInf);
  std::vector<std::uint8_t> advanced(T * L, 0);

  prev[0] = log_posteriors(0, columns[0]);
  for (std::size_t t = 1; t < T; ++t) {
    // Phone i is reachable at frame t only when i <= t and L-1-i <= T-1-t.
    const std::size_t lo = (L > T - t) ? L - (T - t) : 0;
    const std::size_t hi = std::min(t, L - 1);
    std::fill(cur.begin(), cur.end(), kNegInf);
    for (std::size_t i = lo; i <= hi; ++i) {
      const double stay = prev[i];
      const double move = i > 0 ? prev[i - 1] : kNegInf;
      const bool take_move = move >= stay;
      cur[i] = log_posteriors(t, columns[i]) + (take_move ? move : stay);
      advanced[t * L + i] = take_move ? 1 : 0;
    }
    std::swap(prev, cur);
  }

  AlignmentResult result;
  result.log_score = prev[L - 1];
  result.spans.resize(L);
  std::size_t i = L - 1;
  std::size_t end = T - 1;
  for (std::size_t t = T - 1; t > 0; --t) {
    if (advanced[t * L + i]) {
      result.spans[i] = {phones[i], t, end};
      --i;
      end = t - 1;
    }
  }
  result.spans[0] = {phones[0], 0, end};
  return result;
}

void validate_alignment(const Alignment& alignment, std::size_t num_frames) {
  if (alignment.empty()) throw ValidationError(0, "alignment has no spans");
  std::size_t next = 0;
  for (std::size_t k = 0; k < alignment.size(); ++k) {
    const auto& s = alignment[k];
    if (s.start_frame != next || s.end_frame < s.start_frame) {
      throw ValidationError(0, "span " + std::to_string(k) + " (" + s.phone + ") breaks the frame tiling");
    }
    next = s.end_frame + 1;
  }
  if (next != num_frames) {
    throw ValidationError(0, "alignment covers " + std::to_string(next) + " frames, expected " +
                                 std::to_string(num_frames));
  }
}

std::size_t covered_frames(const Alignment& alignment) {
  return alignment.empty() ? 0 : alignment.back().end_frame + 1;
}

std::vector<PhoneDuration> spans_to_durations(const Alignment& alignment, double hop_ms) {
  std::vector<PhoneDuration> out;
  out.reserve(alignment.size());
  for (const auto& s : alignment) {
    out.push_back({s.phone, static_cast<double>(s.num_frames()) * hop_ms});
  }
  return out;
}

}  // namespace cuescore
