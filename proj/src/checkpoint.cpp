#include "cuescore/scoring/checkpoint.hpp"

#include <sstream>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "cuescore/error.hpp"
#include "cuescore/matrix.hpp"

namespace cuescore {

namespace {

constexpr const char* kMagicLine = "CUESCORE-CHECKPOINT 1";

/// Parameters plus the normalizer, as one ordered list of named tensors.
std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_tensors(ScoringModel& model) {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  model.params.visit([&](std::string_view name, Eigen::MatrixXd& m) { out.emplace_back(std::string(name), &m); });
  return out;
}

struct NormBlock {
  const char* name;
  Eigen::VectorXd FeatureNormalizer::*member;
};

constexpr NormBlock kNormBlocks[] = {
    {"norm.numeric_mean", &FeatureNormalizer::numeric_mean},
    {"norm.numeric_scale", &FeatureNormalizer::numeric_scale},
    {"norm.utterance_mean", &FeatureNormalizer::utterance_mean},
    {"norm.utterance_scale", &FeatureNormalizer::utterance_scale},
};

DenseMatrix to_dense(const Eigen::MatrixXd& m) {
  DenseMatrix d(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = static_cast<float>(m(i, j));
  return d;
}

void from_dense(const DenseMatrix& d, Eigen::MatrixXd& m) {
  if (d.rows() != static_cast<std::size_t>(m.rows()) || d.cols() != static_cast<std::size_t>(m.cols())) {
    throw ParseError(ParseError::Kind::kBadHeader, "checkpoint tensor shape does not match its index entry");
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ScoringModel& model_in) {
  ScoringModel model = model_in;
  const auto& c = model.config;
  std::string index = fmt::format("{}\nconfig vocab={} embed_dim={} ff_dim={} hidden={} utt_dim={} classes={}\n",
                                  kMagicLine, c.vocab, c.embed_dim, c.ff_dim, c.hidden, c.utt_dim, c.classes);
  std::vector<DenseMatrix> blocks;
  for (auto& [name, tensor] : named_tensors(model)) {
    index += fmt::format("tensor {} {} {}\n", name, tensor->rows(), tensor->cols());
    blocks.push_back(to_dense(*tensor));
  }
  for (const auto& nb : kNormBlocks) {
    const Eigen::VectorXd& v = model.normalizer.*nb.member;
    index += fmt::format("tensor {} {} 1\n", nb.name, v.size());
    blocks.push_back(to_dense(v));
  }
  index += "end\n";
  std::vector<std::uint8_t> out(index.begin(), index.end());
  for (const auto& b : blocks) {
    const auto bytes = encode_matrix(b);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

ScoringModel decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  // The index is text up to and including "end\n".
  const std::string head(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(bytes.size(), 1 << 16)));
  const auto end_pos = head.find("\nend\n");
  if (head.rfind(kMagicLine, 0) != 0 || end_pos == std::string::npos) {
    throw ParseError(ParseError::Kind::kBadMagic, "not a cuescore checkpoint");
  }
  std::istringstream in(head.substr(0, end_pos + 1));
  std::string line;
  std::getline(in, line);

  ModelConfig config;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> entries;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "config") {
      for (std::string kv; ls >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError(ParseError::Kind::kBadHeader, "bad config entry '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::size_t value = std::stoul(kv.substr(eq + 1));
        if (key == "vocab") config.vocab = value;
        else if (key == "embed_dim") config.embed_dim = value;
        else if (key == "ff_dim") config.ff_dim = value;
        else if (key == "hidden") config.hidden = value;
        else if (key == "utt_dim") config.utt_dim = value;
        else if (key == "classes") config.classes = value;
        else throw ParseError(ParseError::Kind::kBadHeader, "unknown config key '" + key + "'");
      }
    } else if (kind == "tensor") {
      std::string name;
      std::size_t rows = 0, cols = 0;
      if (!(ls >> name >> rows >> cols)) throw ParseError(ParseError::Kind::kBadHeader, "bad tensor line '" + line + "'");
      entries.emplace_back(name, rows, cols);
    } else {
      throw ParseError(ParseError::Kind::kBadHeader, "unexpected index line '" + line + "'");
    }
  }

  ScoringModel model{config, Parameters::zeros(config), FeatureNormalizer{}};
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> targets = named_tensors(model);
  std::vector<Eigen::MatrixXd> norm_storage(std::size(kNormBlocks));
  for (std::size_t k = 0; k < std::size(kNormBlocks); ++k) {
    const Eigen::VectorXd& v = model.normalizer.*kNormBlocks[k].member;
    norm_storage[k] = v;
    targets.emplace_back(kNormBlocks[k].name, &norm_storage[k]);
  }
  if (entries.size() != targets.size()) {
    throw ParseError(ParseError::Kind::kBadHeader, fmt::format("checkpoint lists {} tensors, expected {}",
                                                               entries.size(), targets.size()));
  }

  std::size_t offset = end_pos + 5;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto& [name, rows, cols] = entries[k];
    if (name != targets[k].first) {
      throw ParseError(ParseError::Kind::kBadHeader, "checkpoint tensor '" + name + "' where '" + targets[k].first +
                                                         "' was expected");
    }
    if (rows != static_cast<std::size_t>(targets[k].second->rows()) ||
        cols != static_cast<std::size_t>(targets[k].second->cols())) {
      throw ParseError(ParseError::Kind::kBadHeader, "checkpoint tensor '" + name + "' has the wrong shape");
    }
    std::size_t used = 0;
    const DenseMatrix block =
        decode_matrix(std::span<const std::uint8_t>(bytes.data() + offset, bytes.size() - offset), &used);
    from_dense(block, *targets[k].second);
    offset += used;
  }
  if (offset != bytes.size()) throw ParseError(ParseError::Kind::kBadHeader, "trailing bytes after last tensor");
  for (std::size_t k = 0; k < std::size(kNormBlocks); ++k) {
    model.normalizer.*kNormBlocks[k].member = norm_storage[k].col(0);
  }
  return model;
}

void write_checkpoint(const std::filesystem::path& path, const ScoringModel& model) {
  write_file_bytes(path, encode_checkpoint(model));
}

ScoringModel read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

}  // namespace cuescore
