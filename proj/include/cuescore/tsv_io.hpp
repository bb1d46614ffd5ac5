#pragma once

#include <filesystem>
#include <string>

#include "cuescore/aligner.hpp"
#include "cuescore/duration_model.hpp"

namespace cuescore {

// Alignment TSV: header "phone\tstart_frame\tend_frame", frames inclusive.
std::string format_alignment(const Alignment& alignment);
Alignment parse_alignment(const std::string& text);
Alignment read_alignment(const std::filesystem::path& path);
void write_alignment(const std::filesystem::path& path, const Alignment& alignment);

// Duration-model TSV: header "phone\tmean_ms\tstd_ms\tcount" and one reserved
// "__GLOBAL__" row for the pooled fallback. Reals use round-trip precision.
std::string format_duration_model(const DurationModel& model);
DurationModel parse_duration_model(const std::string& text);
DurationModel read_duration_model(const std::filesystem::path& path);
void write_duration_model(const std::filesystem::path& path, const DurationModel& model);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cuescore
