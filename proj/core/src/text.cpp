#include "hateclf/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "hateclf/error.hpp"

namespace hateclf {
namespace {

struct CodePoint {
  UChar32 value;
  std::size_t begin;  // byte offsets into the source
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  std::int32_t i = 0;
  const auto n = static_cast<std::int32_t>(s.size());
  while (i < n) {
    const std::int32_t start = i;
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_punct(UChar32 c) { return u_ispunct(c) != 0; }

bool is_word_char(UChar32 c) {
  if (c == '_') return true;
  if (u_isalnum(c)) return true;
  const auto mask = U_GET_GC_MASK(c);
  return (mask & U_GC_M_MASK) != 0;  // Devanagari vowel signs, virama
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

bool is_url(std::string_view chunk) {
  return starts_with_icase(chunk, "http://") || starts_with_icase(chunk, "https://") ||
         starts_with_icase(chunk, "www.");
}

void split_punctuation(std::string_view chunk, const std::vector<CodePoint>& cps,
                       std::size_t first, std::size_t last, std::vector<std::string>& out) {
  std::size_t b = first;
  std::size_t e = last;
  while (b < e && is_punct(cps[b].value)) {
    out.emplace_back(chunk.substr(cps[b].begin, cps[b].end - cps[b].begin));
    ++b;
  }
  std::size_t trail_begin = e;
  while (trail_begin > b && is_punct(cps[trail_begin - 1].value)) --trail_begin;
  if (b < trail_begin) {
    out.emplace_back(chunk.substr(cps[b].begin, cps[trail_begin - 1].end - cps[b].begin));
  }
  for (std::size_t k = trail_begin; k < e; ++k) {
    out.emplace_back(chunk.substr(cps[k].begin, cps[k].end - cps[k].begin));
  }
}

void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  if (is_url(chunk)) {
    out.emplace_back(kUrlToken);
    return;
  }
  const auto cps = decode(chunk);
  std::size_t start = 0;
  if (cps.size() >= 2 && cps[0].value == '@' && is_word_char(cps[1].value)) {
    std::size_t k = 1;
    while (k < cps.size() && is_word_char(cps[k].value)) ++k;
    out.emplace_back(kUserToken);
    start = k;
  }
  split_punctuation(chunk, cps, start, cps.size(), out);
}

template <typename Fn>
void for_each_chunk(std::string_view text, Fn&& fn) {
  const auto cps = decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && u_isUWhiteSpace(cps[i].value)) ++i;
    if (i == cps.size()) break;
    std::size_t j = i;
    while (j < cps.size() && !u_isUWhiteSpace(cps[j].value)) ++j;
    fn(text.substr(cps[i].begin, cps[j - 1].end - cps[i].begin));
    i = j;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for_each_chunk(text, [&](std::string_view chunk) { tokenize_chunk(chunk, out); });
  return out;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  for_each_chunk(text, [&](std::string_view) { ++n; });
  return n;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& regular_tokens) {
  tokens_.reserve(regular_tokens.size() + 2);
  tokens_.emplace_back(kPadToken);
  tokens_.emplace_back(kUnkToken);
  index_.emplace(kPadToken, kPad);
  index_.emplace(kUnkToken, kUnk);
  for (const auto& t : regular_tokens) {
    const auto idx = static_cast<std::int32_t>(tokens_.size());
    if (!index_.emplace(t, idx).second) {
      throw Error(ErrorKind::Format, "duplicate vocabulary token '" + t + "'");
    }
    tokens_.push_back(t);
  }
}

std::int32_t Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write vocabulary '" + path.string() + "'");
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open vocabulary '" + path.string() + "'");
  std::vector<std::string> regular;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    auto bad = [&] {
      return Error(ErrorKind::Format,
                   path.filename().string() + ":" + std::to_string(lineno) + ": bad entry");
    };
    if (tab == std::string::npos) throw bad();
    std::size_t idx = 0;
    try {
      idx = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw bad();
    }
    const std::string tok = line.substr(0, tab);
    if (idx != lineno - 1) throw bad();
    if (idx == 0 && tok != kPadToken) throw bad();
    if (idx == 1 && tok != kUnkToken) throw bad();
    if (idx >= 2) regular.push_back(tok);
  }
  return Vocabulary(regular);
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_lists,
                            std::size_t min_freq) {
  if (min_freq < 1) throw Error(ErrorKind::Config, "min_freq must be >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& tokens : token_lists) {
    for (const auto& t : tokens) ++freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [tok, n] : freq) {
    if (n >= min_freq && tok != Vocabulary::kPadToken && tok != Vocabulary::kUnkToken) {
      entries.emplace_back(tok, n);
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;  // map iteration already gives lexicographic ties
  });
  std::vector<std::string> tokens;
  tokens.reserve(entries.size());
  for (auto& [tok, n] : entries) tokens.push_back(tok);
  return Vocabulary(tokens);
}

Vocabulary build_vocabulary(const Dataset& corpus, std::size_t min_freq) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyData, "cannot build a vocabulary from an empty corpus");
  std::vector<std::vector<std::string>> lists;
  lists.reserve(corpus.size());
  for (const auto& e : corpus.examples()) lists.push_back(tokenize(e.text));
  return build_vocabulary(lists, min_freq);
}

EncodedExample encode(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                      std::size_t max_len) {
  if (max_len < 1) throw Error(ErrorKind::Config, "max_len must be >= 1");
  EncodedExample out;
  out.indices.assign(max_len, Vocabulary::kPad);
  out.true_length = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < out.true_length; ++i) {
    const std::int32_t idx = vocab.index_of(tokens[i]);
    out.indices[i] = idx == Vocabulary::kPad ? Vocabulary::kUnk : idx;  // literal "<pad>" text
  }
  return out;
}

}  // namespace hateclf
