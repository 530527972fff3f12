#include <gtest/gtest.h>

#include "hateclf/error.hpp"
#include "hateclf/text.hpp"
#include "support.hpp"

using namespace hateclf;
using hateclf::testing::TempDir;
using hateclf::testing::write_text;
using Tokens = std::vector<std::string>;

TEST(Tokenize, WhitespaceSplit) {
  EXPECT_EQ(tokenize("हा मजकूर वाईट आहे"), (Tokens{"हा", "मजकूर", "वाईट", "आहे"}));
}

TEST(Tokenize, MentionsAndUrls) {
  EXPECT_EQ(tokenize("@abc बघा https://t.co/x"), (Tokens{"<user>", "बघा", "<url>"}));
  EXPECT_EQ(tokenize("see www.example.com now"), (Tokens{"see", "<url>", "now"}));
}

TEST(Tokenize, EmptyAndBlank) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
}

TEST(Tokenize, PunctuationPeeledOff) {
  EXPECT_EQ(tokenize("\"नमस्ते!\" कैसे हो?"), (Tokens{"\"", "नमस्ते", "!", "\"", "कैसे", "हो", "?"}));
  EXPECT_EQ(tokenize("don't"), (Tokens{"don't"}));
  EXPECT_EQ(tokenize("।वाह।"), (Tokens{"।", "वाह", "।"}));
}

TEST(Tokenize, UnicodeWhitespace) {
  EXPECT_EQ(tokenize("a b　c"), (Tokens{"a", "b", "c"}));
}

TEST(CountWords, IgnoresPunctuationSplitting) {
  EXPECT_EQ(count_words("नमस्ते! कैसे हो?"), 3u);
  EXPECT_EQ(count_words(""), 0u);
}

TEST(Vocabulary, SpecialsFixed) {
  const Vocabulary v;
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.index_of("<pad>"), 0);
  EXPECT_EQ(v.index_of("<unk>"), 1);
  EXPECT_EQ(v.index_of("anything"), Vocabulary::kUnk);
}

TEST(BuildVocabulary, FrequencyOrderAndMinFreq) {
  const auto v1 = build_vocabulary({{"a", "b", "b"}}, 1);
  EXPECT_EQ(v1.tokens(), (Tokens{"<pad>", "<unk>", "b", "a"}));
  const auto v2 = build_vocabulary({{"a", "b", "b"}}, 2);
  EXPECT_EQ(v2.tokens(), (Tokens{"<pad>", "<unk>", "b"}));
}

TEST(BuildVocabulary, TiesBrokenLexicographically) {
  const auto v = build_vocabulary({{"z", "y", "x"}, {"y"}});
  EXPECT_EQ(v.tokens(), (Tokens{"<pad>", "<unk>", "y", "x", "z"}));
}

TEST(BuildVocabulary, FromDatasetDeterministic) {
  const auto d = hateclf::testing::keyword_corpus(200, 3, SchemeKind::Binary);
  EXPECT_EQ(build_vocabulary(d), build_vocabulary(d));
}

TEST(BuildVocabulary, PropertyContiguousAndSpecialFree) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tokens> lists(1 + rng.uniform_index(10));
    for (auto& l : lists) {
      const std::size_t n = rng.uniform_index(12);
      for (std::size_t i = 0; i < n; ++i) l.push_back("t" + std::to_string(rng.uniform_index(15)));
    }
    bool any = false;
    for (const auto& l : lists) any = any || !l.empty();
    if (!any) continue;
    const std::size_t min_freq = 1 + rng.uniform_index(3);
    const auto v = build_vocabulary(lists, min_freq);
    EXPECT_EQ(v, build_vocabulary(lists, min_freq));
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(v.index_of(v.token(static_cast<std::int32_t>(i))), static_cast<std::int32_t>(i));
    }
  }
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  TempDir dir;
  const auto v = build_vocabulary({{"नमस्ते", "a", "a", "<url>"}});
  v.save(dir / "v.tsv");
  EXPECT_EQ(Vocabulary::load(dir / "v.tsv"), v);
  write_text(dir / "bad.tsv", "<pad>\t0\n<unk>\t2\n");
  EXPECT_THROW(Vocabulary::load(dir / "bad.tsv"), Error);
}

TEST(Encode, PadsAndMapsUnknowns) {
  const Vocabulary v(Tokens{"b"});
  auto e = encode({"b"}, v, 3);
  EXPECT_EQ(e.indices, (std::vector<std::int32_t>{2, 0, 0}));
  EXPECT_EQ(e.true_length, 1u);
  e = encode({"unseen"}, v, 2);
  EXPECT_EQ(e.indices, (std::vector<std::int32_t>{1, 0}));
  e = encode({"<pad>"}, v, 2);
  EXPECT_EQ(e.indices, (std::vector<std::int32_t>{1, 0}));
}

TEST(Encode, TruncatesTail) {
  Tokens regular;
  for (int i = 0; i < 30; ++i) regular.push_back("w" + std::to_string(i));
  const Vocabulary v(regular);
  const auto e = encode(regular, v, 26);
  ASSERT_EQ(e.indices.size(), 26u);
  EXPECT_EQ(e.true_length, 26u);
  for (int i = 0; i < 26; ++i) EXPECT_EQ(e.indices[static_cast<std::size_t>(i)], i + 2);
}

TEST(Encode, PropertyLengthAndPadding) {
  Rng rng(21);
  const Vocabulary v(Tokens{"a", "b", "c", "d"});
  const Tokens pool{"a", "b", "c", "d", "x", "y"};
  for (int trial = 0; trial < 200; ++trial) {
    Tokens toks(rng.uniform_index(20));
    for (auto& t : toks) t = pool[rng.uniform_index(pool.size())];
    const std::size_t max_len = 1 + rng.uniform_index(15);
    const auto e = encode(toks, v, max_len);
    ASSERT_EQ(e.indices.size(), max_len);
    EXPECT_EQ(e.true_length, std::min(toks.size(), max_len));
    for (std::size_t i = 0; i < max_len; ++i) {
      EXPECT_EQ(e.indices[i] == Vocabulary::kPad, i >= e.true_length);
      EXPECT_LT(e.indices[i], static_cast<std::int32_t>(v.size()));
    }
  }
}
