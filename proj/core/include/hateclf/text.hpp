#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hateclf/dataset.hpp"

namespace hateclf {

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";

// Splits on Unicode whitespace, collapses URLs to <url> and @-mentions to
// <user>, and peels leading/trailing punctuation off each chunk as separate
// single-character tokens.
std::vector<std::string> tokenize(std::string_view text);

// Number of whitespace-delimited words (no punctuation splitting).
std::size_t count_words(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();  // specials only

  // Tokens in index order starting at 2. Duplicates or specials are rejected.
  explicit Vocabulary(const std::vector<std::string>& regular_tokens);

  std::int32_t index_of(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Two-column "token<TAB>index" file, one line per entry including specials.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Tokens with frequency >= min_freq, ordered by descending frequency then by
// byte-wise lexicographic order.
Vocabulary build_vocabulary(const Dataset& corpus, std::size_t min_freq = 1);
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_lists,
                            std::size_t min_freq = 1);

struct EncodedExample {
  std::vector<std::int32_t> indices;  // exactly max_len entries
  std::size_t true_length = 0;
};

// Maps OOV to UNK, keeps the first max_len tokens, right-pads with PAD.
EncodedExample encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                      std::size_t max_len);

}  // namespace hateclf
