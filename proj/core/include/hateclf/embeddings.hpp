#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hateclf/nn/tensor.hpp"
#include "hateclf/text.hpp"

namespace hateclf {

inline constexpr std::size_t kDefaultEmbeddingDim = 300;

enum class EmbeddingMode { Random, TrainablePretrained, FrozenPretrained };

std::string_view to_string(EmbeddingMode mode);
EmbeddingMode embedding_mode_from_string(std::string_view name);

struct WordVectors {
  std::size_t dim = kDefaultEmbeddingDim;
  std::unordered_map<std::string, std::vector<float>> vectors;

  std::size_t size() const { return vectors.size(); }
  const std::vector<float>* find(const std::string& token) const;
};

/// Reads a `.vec` text file: optional "<count> <dim>" header, then one
/// "token v1 ... v_dim" row per line. The first occurrence of a token wins.
WordVectors load_word_vectors(const std::filesystem::path& path,
                              std::size_t expected_dim = kDefaultEmbeddingDim);

struct EmbeddingMatrix {
  Vocabulary vocab;
  nn::Matrix values;  // vocab.size() x dim, row 0 (PAD) all zero
  EmbeddingMode mode = EmbeddingMode::Random;
  double coverage = 0.0;  // share of non-special vocabulary rows found in the vectors

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  bool trainable() const { return mode != EmbeddingMode::FrozenPretrained; }
};

// Every non-PAD row starts as uniform(-0.05, 0.05) noise drawn row-major from
// Rng(seed); rows whose token has a pretrained vector are then overwritten.
// `dim` applies only when no vectors are given.
EmbeddingMatrix build_embedding_matrix(const Vocabulary& vocab, const WordVectors* vectors,
                                       EmbeddingMode mode, std::uint64_t seed,
                                       std::size_t dim = kDefaultEmbeddingDim);

}  // namespace hateclf
