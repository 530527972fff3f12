#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hateclf {

// BERT-style tokenizer: text cleanup, optional lower-casing with accent
// stripping, punctuation and CJK splitting, then greedy longest-match-first
// WordPiece over a fixed vocabulary with "##" continuation pieces.
class WordPieceTokenizer {
 public:
  WordPieceTokenizer(std::vector<std::string> vocab, bool lower_case);

  // Reads vocab.txt and, when present, tokenizer_config.json (do_lower_case).
  static WordPieceTokenizer from_directory(const std::filesystem::path& dir);

  std::vector<std::string> basic_tokenize(std::string_view text) const;
  std::vector<std::string> wordpiece(const std::string& word) const;
  std::vector<std::int32_t> encode(std::string_view text) const;  // no specials

  // [CLS] pieces [SEP] padded with [PAD] / truncated to max_len.
  std::vector<std::int32_t> encode_for_classification(std::string_view text,
                                                      std::size_t max_len) const;

  std::int32_t id(std::string_view token) const;  // unk_id() when absent
  std::int32_t cls_id() const { return cls_; }
  std::int32_t sep_id() const { return sep_; }
  std::int32_t pad_id() const { return pad_; }
  std::int32_t unk_id() const { return unk_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  bool lower_case() const { return lower_case_; }
  const std::vector<std::string>& vocab() const { return vocab_; }

  void save(const std::filesystem::path& dir) const;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::int32_t> index_;
  bool lower_case_;
  std::int32_t cls_ = -1;
  std::int32_t sep_ = -1;
  std::int32_t pad_ = -1;
  std::int32_t unk_ = -1;
};

}  // namespace hateclf
