#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cuescore {

/// Row-major float32 matrix, the in-memory twin of an MTX1 file.
///
/// MTX1 layout: "MTX1", rows (u32 LE), cols (u32 LE), then rows*cols IEEE-754
/// float32 LE values in row-major order. No padding, no footer.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  float& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<float> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  const std::vector<float>& values() const noexcept { return values_; }

  /// True when every entry is finite.
  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

/// Serialize to MTX1 bytes. Throws ParseError(kNonFinite) if any value is not finite.
std::vector<std::uint8_t> encode_matrix(const DenseMatrix& m);

/// Parse MTX1 bytes. The buffer must hold exactly one matrix unless `consumed`
/// is non-null, in which case trailing bytes are allowed and the size of the
/// parsed block is reported.
DenseMatrix decode_matrix(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

DenseMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);

// Shared byte helpers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cuescore
