#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hateclf/dataset.hpp"
#include "hateclf/rng.hpp"

namespace hateclf::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hateclf-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HATECLF_TEST_DATA) / name;
}

// Keyword corpus: a text's class is decided solely by which keyword it holds.
// BINARY: HOF iff one of five keywords occurs. FINE: NONE has no keyword,
// HATE/OFFN/PRFN each own two keywords. Everything else is noise.
inline Dataset keyword_corpus(std::size_t n, std::uint64_t seed, SchemeKind kind,
                              const std::string& split = "synthetic") {
  Rng rng(seed);
  std::vector<std::string> noise;
  for (int i = 0; i < 60; ++i) noise.push_back("w" + std::to_string(i));
  const std::vector<std::string> hof_kw{"kwa", "kwb", "kwc", "kwd", "kwe"};
  const std::vector<std::vector<std::string>> fine_kw{{}, {"hta", "htb"}, {"ofa", "ofb"}, {"pra", "prb"}};
  const std::vector<std::string> fine_labels{"NONE", "HATE", "OFFN", "PRFN"};

  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> toks;
    const std::size_t len = 5 + rng.uniform_index(11);
    for (std::size_t k = 0; k < len; ++k) toks.push_back(noise[rng.uniform_index(noise.size())]);
    LabeledExample e;
    e.id = "s" + std::to_string(i);
    if (kind == SchemeKind::Binary) {
      const bool hof = i % 2 == 0;
      if (hof) {
        toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(toks.size() + 1)),
                    hof_kw[rng.uniform_index(hof_kw.size())]);
      }
      e.binary_label = hof ? "HOF" : "NOT";
    } else {
      const std::size_t c = (i % 5 < 2) ? 0 : (i % 5) - 1;  // 40% NONE, 20% each other
      if (c > 0) {
        const auto& kw = fine_kw[c];
        toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(toks.size() + 1)),
                    kw[rng.uniform_index(kw.size())]);
      }
      e.fine_label = fine_labels[c];
      e.binary_label = c == 0 ? "NOT" : "HOF";
    }
    for (std::size_t k = 0; k < toks.size(); ++k) e.text += (k ? " " : "") + toks[k];
    out.push_back(std::move(e));
  }
  return Dataset(split, LabelScheme::of(kind == SchemeKind::Binary ? SchemeKind::Binary : SchemeKind::Fine),
                 std::move(out));
}

}  // namespace hateclf::testing
