#include "cuescore/tsv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "cuescore/error.hpp"
#include "cuescore/phonemes.hpp"

namespace cuescore {

namespace {

constexpr const char* kAlignmentHeader = "phone\tstart_frame\tend_frame";
constexpr const char* kDurationHeader = "phone\tmean_ms\tstd_ms\tcount";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::size_t parse_count(const std::string& s, std::size_t line, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(line, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s, std::size_t line, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw ValidationError(line, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> data_lines(const std::string& text, const char* header) {
  std::istringstream in(text);
  std::vector<std::string> lines;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ValidationError(1, std::string("expected header '") + header + "'");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing empty line is only the final newline.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("no such file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_alignment(const Alignment& alignment) {
  std::string out = std::string(kAlignmentHeader) + "\n";
  for (const auto& s : alignment) out += fmt::format("{}\t{}\t{}\n", s.phone, s.start_frame, s.end_frame);
  return out;
}

Alignment parse_alignment(const std::string& text) {
  Alignment alignment;
  const auto lines = data_lines(text, kAlignmentHeader);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::size_t line_no = k + 2;
    const auto f = split_tabs(lines[k]);
    if (f.size() != 3) throw ValidationError(line_no, "expected 3 tab-separated fields");
    if (!PhonemeInventory::contains(f[0])) throw ValidationError(line_no, "unknown phone symbol '" + f[0] + "'");
    PhoneSpan span{f[0], parse_count(f[1], line_no, "start_frame"), parse_count(f[2], line_no, "end_frame")};
    alignment.push_back(std::move(span));
  }
  validate_alignment(alignment, covered_frames(alignment));
  return alignment;
}

Alignment read_alignment(const std::filesystem::path& path) {
  try {
    return parse_alignment(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(0, path.string() + ": " + e.what());
  }
}

void write_alignment(const std::filesystem::path& path, const Alignment& alignment) {
  write_text_file(path, format_alignment(alignment));
}

std::string format_duration_model(const DurationModel& model) {
  std::string out = std::string(kDurationHeader) + "\n";
  for (const auto& [phone, s] : model.phones()) {
    out += fmt::format("{}\t{}\t{}\t{}\n", phone, s.mean_ms, s.std_ms, s.count);
  }
  if (const auto& g = model.global()) {
    out += fmt::format("{}\t{}\t{}\t{}\n", kGlobalPhone, g->mean_ms, g->std_ms, g->count);
  }
  return out;
}

DurationModel parse_duration_model(const std::string& text) {
  DurationModel model;
  const auto lines = data_lines(text, kDurationHeader);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::size_t line_no = k + 2;
    const auto f = split_tabs(lines[k]);
    if (f.size() != 4) throw ValidationError(line_no, "expected 4 tab-separated fields");
    DurationStats s{parse_real(f[1], line_no, "mean_ms"), parse_real(f[2], line_no, "std_ms"),
                    parse_count(f[3], line_no, "count")};
    if (s.std_ms < kDurationStdFloorMs) throw ValidationError(line_no, "std_ms below the 5 ms floor");
    if (f[0] == kGlobalPhone) {
      if (model.global()) throw ValidationError(line_no, "duplicate __GLOBAL__ row");
      if (s.count < 1) throw ValidationError(line_no, "__GLOBAL__ row needs count >= 1");
      model.set_global(s);
    } else {
      if (!PhonemeInventory::contains(f[0])) throw ValidationError(line_no, "unknown phone symbol '" + f[0] + "'");
      if (model.phones().count(f[0])) throw ValidationError(line_no, "duplicate row for '" + f[0] + "'");
      model.set_phone(f[0], s);
    }
  }
  if (!model.global()) throw ValidationError(0, "duration model lacks the __GLOBAL__ row");
  return model;
}

DurationModel read_duration_model(const std::filesystem::path& path) {
  try {
    return parse_duration_model(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(0, path.string() + ": " + e.what());
  }
}

void write_duration_model(const std::filesystem::path& path, const DurationModel& model) {
  write_text_file(path, format_duration_model(model));
}

}  // namespace cuescore
