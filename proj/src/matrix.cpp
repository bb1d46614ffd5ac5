#include "cuescore/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cuescore/error.hpp"

namespace cuescore {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'X', '1'};
constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, float fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix payload has " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(rows_ * cols_));
  }
}

bool DenseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

std::vector<std::uint8_t> encode_matrix(const DenseMatrix& m) {
  if (!m.all_finite()) {
    throw ParseError(ParseError::Kind::kNonFinite, "matrix contains non-finite values");
  }
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw ShapeError("matrix dimensions exceed 32 bits");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * m.values().size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (float v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

DenseMatrix decode_matrix(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError(ParseError::Kind::kBadMagic, "bad MTX1 magic");
  }
  if (bytes.size() < kHeaderBytes) {
    throw ParseError(ParseError::Kind::kTruncated, "MTX1 header truncated");
  }
  const std::uint64_t rows = get_u32(bytes.data() + 4);
  const std::uint64_t cols = get_u32(bytes.data() + 8);
  const std::uint64_t count = rows * cols;
  const std::uint64_t need = kHeaderBytes + 4 * count;
  if (bytes.size() < need) {
    throw ParseError(ParseError::Kind::kTruncated,
                     "MTX1 payload truncated: header declares " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " but only " +
                         std::to_string((bytes.size() - kHeaderBytes) / 4) + " floats present");
  }
  if (consumed == nullptr && bytes.size() != need) {
    throw ParseError(ParseError::Kind::kBadHeader, "MTX1 file has trailing bytes");
  }
  std::vector<float> values(count);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i, p += 4) {
    const float v = std::bit_cast<float>(get_u32(p));
    if (!std::isfinite(v)) {
      throw ParseError(ParseError::Kind::kNonFinite,
                       "MTX1 value " + std::to_string(i) + " is not finite");
    }
    values[i] = v;
  }
  if (consumed) *consumed = need;
  return DenseMatrix(rows, cols, std::move(values));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("no such file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_matrix(bytes);
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  write_file_bytes(path, encode_matrix(m));
}

}  // namespace cuescore
