#include "hateclf/wordpiece.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fstream>

#include "hateclf/error.hpp"
#include "json.hpp"

namespace hateclf {
namespace {

constexpr std::size_t kMaxCharsPerWord = 100;

void append_utf8(std::string& out, UChar32 c) {
  char buf[4];
  std::int32_t n = 0;
  UBool err = false;
  U8_APPEND(buf, n, 4, c, err);
  if (!err) out.append(buf, static_cast<std::size_t>(n));
}

std::vector<UChar32> decode(std::string_view s) {
  std::vector<UChar32> out;
  std::int32_t i = 0;
  const auto n = static_cast<std::int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

bool is_whitespace(UChar32 c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || u_charType(c) == U_SPACE_SEPARATOR;
}

bool is_control(UChar32 c) {
  if (c == '\t' || c == '\n' || c == '\r') return false;
  const auto mask = U_GET_GC_MASK(c);
  return (mask & U_GC_C_MASK) != 0;
}

bool is_punctuation(UChar32 c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return u_ispunct(c) != 0;
}

bool is_cjk(UChar32 c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

std::string lower_and_strip_accents(const std::string& word) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(word);
  u.toLower();
  icu::UnicodeString decomposed = U_SUCCESS(status) ? nfd->normalize(u, status) : u;
  if (U_FAILURE(status)) decomposed = u;
  std::string utf8;
  decomposed.toUTF8String(utf8);
  std::string out;
  for (UChar32 c : decode(utf8)) {
    if (u_charType(c) == U_NON_SPACING_MARK) continue;
    append_utf8(out, c);
  }
  return out;
}

}  // namespace

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab, bool lower_case)
    : vocab_(std::move(vocab)), lower_case_(lower_case) {
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    index_.try_emplace(vocab_[i], static_cast<std::int32_t>(i));
  }
  auto special = [&](const char* tok) {
    auto it = index_.find(tok);
    if (it == index_.end()) {
      throw Error(ErrorKind::Load, std::string("tokenizer vocabulary lacks ") + tok);
    }
    return it->second;
  };
  cls_ = special("[CLS]");
  sep_ = special("[SEP]");
  pad_ = special("[PAD]");
  unk_ = special("[UNK]");
}

WordPieceTokenizer WordPieceTokenizer::from_directory(const std::filesystem::path& dir) {
  std::ifstream in(dir / "vocab.txt", std::ios::binary);
  if (!in) throw Error(ErrorKind::Load, "checkpoint '" + dir.string() + "' has no vocab.txt");
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  bool lower = true;
  const auto cfg = dir / "tokenizer_config.json";
  if (std::filesystem::exists(cfg)) {
    std::ifstream cin(cfg, std::ios::binary);
    try {
      const auto j = nlohmann::json::parse(cin);
      lower = j.value("do_lower_case", true);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Load, "bad tokenizer_config.json: " + std::string(e.what()));
    }
  }
  return WordPieceTokenizer(std::move(vocab), lower);
}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(std::string_view text) const {
  // Clean, isolate CJK ideographs, split on whitespace.
  std::string cleaned;
  for (UChar32 c : decode(text)) {
    if (c == 0 || c == 0xFFFD || is_control(c)) continue;
    if (is_whitespace(c)) {
      cleaned.push_back(' ');
    } else if (is_cjk(c)) {
      cleaned.push_back(' ');
      append_utf8(cleaned, c);
      cleaned.push_back(' ');
    } else {
      append_utf8(cleaned, c);
    }
  }
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    std::size_t j = i;
    while (j < cleaned.size() && cleaned[j] != ' ') ++j;
    if (j > i) {
      std::string word = cleaned.substr(i, j - i);
      if (lower_case_) word = lower_and_strip_accents(word);
      std::string current;
      for (UChar32 c : decode(word)) {
        if (is_punctuation(c)) {
          if (!current.empty()) out.push_back(std::move(current));
          current.clear();
          std::string p;
          append_utf8(p, c);
          out.push_back(std::move(p));
        } else {
          append_utf8(current, c);
        }
      }
      if (!current.empty()) out.push_back(std::move(current));
    }
    i = j;
  }
  return out;
}

std::vector<std::string> WordPieceTokenizer::wordpiece(const std::string& word) const {
  const auto cps = decode(word);
  if (cps.size() > kMaxCharsPerWord) return {vocab_[static_cast<std::size_t>(unk_)]};
  // Byte offset of each code point boundary.
  std::vector<std::size_t> offsets{0};
  for (UChar32 c : cps) {
    std::string tmp;
    append_utf8(tmp, c);
    offsets.push_back(offsets.back() + tmp.size());
  }
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < cps.size()) {
    std::size_t end = cps.size();
    std::string found;
    while (start < end) {
      std::string sub = word.substr(offsets[start], offsets[end] - offsets[start]);
      if (start > 0) sub = "##" + sub;
      if (index_.count(sub)) {
        found = std::move(sub);
        break;
      }
      --end;
    }
    if (found.empty()) return {vocab_[static_cast<std::size_t>(unk_)]};
    pieces.push_back(std::move(found));
    start = end;
  }
  return pieces;
}

std::int32_t WordPieceTokenizer::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_ : it->second;
}

std::vector<std::int32_t> WordPieceTokenizer::encode(std::string_view text) const {
  std::vector<std::int32_t> ids;
  for (const auto& word : basic_tokenize(text)) {
    for (const auto& piece : wordpiece(word)) ids.push_back(id(piece));
  }
  return ids;
}

std::vector<std::int32_t> WordPieceTokenizer::encode_for_classification(std::string_view text,
                                                                       std::size_t max_len) const {
  if (max_len < 2) throw Error(ErrorKind::Config, "transformer max_len must be >= 2");
  std::vector<std::int32_t> ids = encode(text);
  if (ids.size() > max_len - 2) ids.resize(max_len - 2);
  std::vector<std::int32_t> out;
  out.reserve(max_len);
  out.push_back(cls_);
  out.insert(out.end(), ids.begin(), ids.end());
  out.push_back(sep_);
  out.resize(max_len, pad_);
  return out;
}

void WordPieceTokenizer::save(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "vocab.txt", std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write vocab.txt in '" + dir.string() + "'");
  for (const auto& t : vocab_) out << t << '\n';
  std::ofstream cfg(dir / "tokenizer_config.json", std::ios::binary);
  cfg << nlohmann::json{{"do_lower_case", lower_case_}}.dump(2) << '\n';
}

}  // namespace hateclf
