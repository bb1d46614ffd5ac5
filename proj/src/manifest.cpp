#include "cuescore/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cuescore/error.hpp"
#include "cuescore/phonemes.hpp"

namespace cuescore {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(line, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw ValidationError(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int require_score(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_number_integer()) {
    throw ValidationError(line, std::string("field '") + key + "' must be an integer");
  }
  const auto score = v.get<long long>();
  if (score < 0 || score > 10) {
    throw ValidationError(line, std::string("field '") + key + "' = " + std::to_string(score) +
                                    " outside 0..10");
  }
  return static_cast<int>(score);
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_or_absolute(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.is_relative()) return p.generic_string();
  auto rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

}  // namespace

std::vector<UtteranceManifestEntry> parse_manifest(const std::string& text,
                                                   const std::filesystem::path& base_dir) {
  std::vector<UtteranceManifestEntry> entries;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ValidationError(line_no, "entry must be a JSON object");

    UtteranceManifestEntry e;
    e.id = require_string(obj, "id", line_no);
    e.wav_path = resolve(require_string(obj, "wav_path", line_no), base_dir);
    e.ct_path = resolve(require_string(obj, "ct_path", line_no), base_dir);
    e.posterior_path = resolve(require_string(obj, "posterior_path", line_no), base_dir);
    const json& phones = require(obj, "phones", line_no);
    if (!phones.is_array()) throw ValidationError(line_no, "field 'phones' must be an array");
    if (phones.empty()) throw ValidationError(line_no, "field 'phones' is empty");
    for (const auto& p : phones) {
      if (!p.is_string()) throw ValidationError(line_no, "phone symbols must be strings");
      auto sym = p.get<std::string>();
      if (!PhonemeInventory::contains(sym)) {
        throw ValidationError(line_no, "unknown phone symbol '" + sym + "'");
      }
      e.phones.push_back(std::move(sym));
    }
    e.fluency = require_score(obj, "fluency", line_no);
    e.prosody = require_score(obj, "prosody", line_no);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<UtteranceManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("no such file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const std::vector<UtteranceManifestEntry>& entries) {
  const auto base = path.parent_path();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const auto& e : entries) {
    json obj = json::object();
    obj["id"] = e.id;
    obj["wav_path"] = relative_or_absolute(e.wav_path, base);
    obj["ct_path"] = relative_or_absolute(e.ct_path, base);
    obj["posterior_path"] = relative_or_absolute(e.posterior_path, base);
    obj["phones"] = e.phones;
    obj["fluency"] = e.fluency;
    obj["prosody"] = e.prosody;
    out << obj.dump() << '\n';
  }
}

}  // namespace cuescore
