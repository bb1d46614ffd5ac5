#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cuescore {

/// One utterance of a training or scoring set. Paths are absolute after
/// read_manifest (relative entries resolve against the manifest's directory).
struct UtteranceManifestEntry {
  std::string id;
  std::filesystem::path wav_path;
  std::filesystem::path ct_path;
  std::filesystem::path posterior_path;
  std::vector<std::string> phones;
  int fluency = 0;
  int prosody = 0;
};

/// Parses line-delimited JSON. Blank lines are skipped; every other line must be
/// a complete entry. Errors are ValidationError carrying the 1-based line number.
std::vector<UtteranceManifestEntry> read_manifest(const std::filesystem::path& path);

std::vector<UtteranceManifestEntry> parse_manifest(const std::string& text,
                                                   const std::filesystem::path& base_dir);

/// Writes entries with paths relative to the manifest's directory when possible.
void write_manifest(const std::filesystem::path& path, const std::vector<UtteranceManifestEntry>& entries);

}  // namespace cuescore
