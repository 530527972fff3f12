#include "hateclf/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "hateclf/error.hpp"
#include "hateclf/labels.hpp"
#include "hateclf/nn/layers.hpp"
#include "hateclf/rng.hpp"

namespace hateclf {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_float(std::string_view s, float& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string_view to_string(EmbeddingMode mode) {
  switch (mode) {
    case EmbeddingMode::Random: return "random";
    case EmbeddingMode::TrainablePretrained: return "trainable_pretrained";
    case EmbeddingMode::FrozenPretrained: return "frozen_pretrained";
  }
  return "?";
}

EmbeddingMode embedding_mode_from_string(std::string_view name) {
  std::string n = normalize_label(name);
  for (auto& c : n) {
    if (c == '-') c = '_';
  }
  if (n == "RANDOM") return EmbeddingMode::Random;
  if (n == "TRAINABLE_PRETRAINED" || n == "TRAINABLE") return EmbeddingMode::TrainablePretrained;
  if (n == "FROZEN_PRETRAINED" || n == "FROZEN" || n == "NON_TRAINABLE") {
    return EmbeddingMode::FrozenPretrained;
  }
  throw Error(ErrorKind::Config, "unknown embedding mode '" + std::string(name) + "'");
}

const std::vector<float>* WordVectors::find(const std::string& token) const {
  auto it = vectors.find(token);
  return it == vectors.end() ? nullptr : &it->second;
}

WordVectors load_word_vectors(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open word vectors '" + path.string() + "'");
  WordVectors wv;
  wv.dim = expected_dim;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    return Error(ErrorKind::Format,
                 path.filename().string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2) {
      std::size_t count = 0;
      std::size_t dim = 0;
      if (parse_size(fields[0], count) && parse_size(fields[1], dim)) {
        if (dim != expected_dim) {
          throw fail("header declares dimension " + std::to_string(dim) + ", expected " +
                     std::to_string(expected_dim));
        }
        continue;
      }
    }
    if (fields.size() - 1 != expected_dim) {
      throw fail("expected " + std::to_string(expected_dim) + " components, found " +
                 std::to_string(fields.size() - 1));
    }
    std::vector<float> v(expected_dim);
    for (std::size_t k = 0; k < expected_dim; ++k) {
      if (!parse_float(fields[k + 1], v[k])) {
        throw fail("unparseable component '" + std::string(fields[k + 1]) + "'");
      }
    }
    wv.vectors.try_emplace(std::string(fields[0]), std::move(v));
  }
  return wv;
}

EmbeddingMatrix build_embedding_matrix(const Vocabulary& vocab, const WordVectors* vectors,
                                       EmbeddingMode mode, std::uint64_t seed, std::size_t dim) {
  if (mode != EmbeddingMode::Random && vectors == nullptr) {
    throw Error(ErrorKind::Config,
                std::string(to_string(mode)) + " embeddings require a word-vector file");
  }
  if (vectors) dim = vectors->dim;
  if (dim == 0) throw Error(ErrorKind::Config, "embedding dimension must be positive");

  EmbeddingMatrix m{vocab, nn::Matrix(vocab.size(), dim), mode, 0.0};
  Rng rng(seed);
  nn::uniform_fill(m.values, -0.05f, 0.05f, rng);
  m.values.row(Vocabulary::kPad).setZero();

  const std::size_t regular = vocab.size() > 2 ? vocab.size() - 2 : 0;
  std::size_t found = 0;
  if (vectors) {
    for (std::size_t r = 2; r < vocab.size(); ++r) {
      const auto* v = vectors->find(vocab.token(static_cast<std::int32_t>(r)));
      if (!v) continue;
      ++found;
      if (mode == EmbeddingMode::Random) continue;
      for (std::size_t k = 0; k < dim; ++k) {
        m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = (*v)[k];
      }
    }
  }
  m.coverage = regular == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(regular);
  return m;
}

}  // namespace hateclf
