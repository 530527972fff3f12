#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hateclf/dataset.hpp"
#include "hateclf/delimited.hpp"
#include "hateclf/error.hpp"
#include "hateclf/labels.hpp"
#include "support.hpp"

using namespace hateclf;
using hateclf::testing::TempDir;
using hateclf::testing::data_path;
using hateclf::testing::write_text;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::Config;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

Dataset random_fine(Rng& rng, std::size_t n) {
  const auto scheme = LabelScheme::fine();
  std::vector<LabeledExample> ex;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample e;
    e.id = "r" + std::to_string(i);
    e.text = "t" + std::to_string(rng.uniform_index(1000));
    e.fine_label = scheme.label(rng.uniform_index(4));
    ex.push_back(e);
  }
  return Dataset("rand", scheme, ex);
}

}  // namespace

TEST(LabelScheme, FixedOrders) {
  EXPECT_EQ(LabelScheme::binary().labels(), (std::vector<std::string>{"HOF", "NOT"}));
  EXPECT_EQ(LabelScheme::fine().labels(),
            (std::vector<std::string>{"NONE", "HATE", "OFFN", "PRFN"}));
  EXPECT_EQ(LabelScheme::ternary().labels(), (std::vector<std::string>{"HATE", "OFFN", "PRFN"}));
}

TEST(LabelScheme, LookupIgnoresCaseAndPadding) {
  const auto s = LabelScheme::fine();
  EXPECT_EQ(s.index_of(" offn "), 2u);
  EXPECT_EQ(s.canonical("Prfn"), "PRFN");
  EXPECT_FALSE(s.contains("HOF"));
}

TEST(LabelScheme, RejectsDuplicatesAndSingletons) {
  EXPECT_THROW(LabelScheme(SchemeKind::Binary, {"A", "a"}), Error);
  EXPECT_THROW(LabelScheme(SchemeKind::Binary, {"A"}), Error);
}

TEST(Delimited, QuotingAndDelimiterDetection) {
  const auto t = parse_delimited("id,text\n1,\"a, \"\"quoted\"\"\nline\"\n\n2,b\r\n");
  EXPECT_EQ(t.delimiter, ',');
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "a, \"quoted\"\nline");
  EXPECT_EQ(t.rows[1][1], "b");
  EXPECT_EQ(t.line_numbers[1], 5u);
  EXPECT_EQ(parse_delimited("\xEF\xBB\xBFid\ttext\n1\tx\n").header[0], "id");
}

TEST(LoadDataset, ReadsBinaryCounts) {
  const auto d = load_dataset(data_path("binary_counts.tsv"), LabelScheme::binary(), "task_1");
  EXPECT_EQ(d.size(), 1874u);
  const auto dist = class_distribution(d);
  EXPECT_EQ(dist.at("HOF"), 669u);
  EXPECT_EQ(dist.at("NOT"), 1205u);
  EXPECT_EQ(dist.to_json(), "{\"HOF\":669,\"NOT\":1205}");
}

TEST(LoadDataset, ReadsFineCountsAndBinaryView) {
  const auto d = load_dataset(data_path("fine_counts.tsv"), LabelScheme::fine(), "task_2");
  const auto dist = class_distribution(d);
  EXPECT_EQ(dist.at("NONE"), 3161u);
  EXPECT_EQ(dist.at("OFFN"), 654u);
  EXPECT_EQ(dist.at("HATE"), 566u);
  EXPECT_EQ(dist.at("PRFN"), 213u);
  const auto bin = class_distribution(binary_view(d));
  EXPECT_EQ(bin.at("HOF"), 1433u);
  EXPECT_EQ(bin.at("NOT"), 3161u);
  EXPECT_EQ(filter_non_none(d).size(), 1433u);
}

TEST(LoadDataset, HeaderOnlyIsEmptyDataError) {
  TempDir dir;
  write_text(dir / "h.tsv", "tweet_id\ttext\ttask_1\n");
  EXPECT_EQ(kind_of([&] { load_dataset(dir / "h.tsv", LabelScheme::binary(), "task_1"); }),
            ErrorKind::EmptyData);
}

TEST(LoadDataset, MissingColumnNamesTheColumn) {
  TempDir dir;
  write_text(dir / "m.tsv", "tweet_id\ttext\n1\thello\n");
  const auto msg = message_of([&] { load_dataset(dir / "m.tsv", LabelScheme::binary(), "task_1"); });
  EXPECT_NE(msg.find("task_1"), std::string::npos);
  EXPECT_EQ(kind_of([&] { load_dataset(dir / "m.tsv", LabelScheme::binary(), "task_1"); }),
            ErrorKind::Schema);
}

TEST(LoadDataset, UnknownLabelCitesRow) {
  TempDir dir;
  write_text(dir / "u.tsv", "tweet_id\ttext\ttask_1\n1\thello\tHOF\n2\tworld\tMAYBE\n");
  const auto msg = message_of([&] { load_dataset(dir / "u.tsv", LabelScheme::binary(), "task_1"); });
  EXPECT_NE(msg.find(":3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("MAYBE"), std::string::npos);
}

TEST(LoadDataset, RejectsDuplicateIdsBlankTextAndInconsistentLabels) {
  TempDir dir;
  write_text(dir / "d.tsv", "tweet_id\ttext\ttask_1\n1\ta\tHOF\n1\tb\tNOT\n");
  EXPECT_EQ(kind_of([&] { load_dataset(dir / "d.tsv", LabelScheme::binary(), "task_1"); }),
            ErrorKind::Validation);
  write_text(dir / "b.tsv", "tweet_id\ttext\ttask_1\n1\t  \tHOF\n");
  EXPECT_EQ(kind_of([&] { load_dataset(dir / "b.tsv", LabelScheme::binary(), "task_1"); }),
            ErrorKind::Validation);
  write_text(dir / "c.tsv", "tweet_id\ttext\ttask_1\ttask_2\n1\ta\tHOF\tNONE\n");
  EXPECT_EQ(kind_of([&] { load_dataset(dir / "c.tsv", LabelScheme::fine(), "task_2"); }),
            ErrorKind::Validation);
}

TEST(LoadDataset, LabelsAreCanonicalised) {
  TempDir dir;
  write_text(dir / "l.csv", "tweet_id,text,task_1\n1,a, hof \n2,b,not\n");
  const auto d = load_dataset(dir / "l.csv", LabelScheme::binary(), "task_1");
  EXPECT_EQ(d.labels(), (std::vector<std::string>{"HOF", "NOT"}));
}

TEST(LoadDataset, UnlabeledFile) {
  TempDir dir;
  write_text(dir / "t.tsv", "tweet_id\ttext\n1\ta\n2\tb\n");
  const auto d = load_dataset(dir / "t.tsv", LabelScheme::binary(), std::nullopt);
  EXPECT_FALSE(d.labeled());
  EXPECT_EQ(d.size(), 2u);
  EXPECT_THROW(class_distribution(d), Error);
}

TEST(SaveDataset, RoundTripPreservesEverything) {
  TempDir dir;
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LabeledExample> ex;
    const std::size_t n = 1 + rng.uniform_index(30);
    for (std::size_t i = 0; i < n; ++i) {
      LabeledExample e;
      e.id = "id" + std::to_string(i) + (rng.bernoulli(0.3) ? ",x" : "");
      const char* pieces[] = {"नमस्ते", "a\tb", "say \"hi\"", "line\nbreak", "plain", "🙂"};
      e.text = std::string(pieces[rng.uniform_index(6)]) + " " + pieces[rng.uniform_index(6)];
      e.fine_label = LabelScheme::fine().label(rng.uniform_index(4));
      e.binary_label = binary_from_fine(*e.fine_label);
      ex.push_back(e);
    }
    const Dataset d("rt", LabelScheme::fine(), ex);
    save_dataset(d, dir / "rt.tsv");
    const auto back = load_dataset(dir / "rt.tsv", LabelScheme::fine(), "task_2");
    EXPECT_EQ(back.examples(), d.examples());
  }
}

TEST(ClassDistribution, EmptyDatasetIsAllZero) {
  const Dataset d("e", LabelScheme::fine(), {});
  const auto dist = class_distribution(d);
  EXPECT_EQ(dist.counts, (std::vector<std::size_t>{0, 0, 0, 0}));
}

TEST(StratifiedSplit, MatchesIndependentRoundingOracle) {
  const auto d = load_dataset(data_path("binary_counts.tsv"), LabelScheme::binary(), "task_1");
  const auto [train, val] = stratified_split(d, 0.1, 42);
  // Oracle: per class floor(n * f + 0.5), clamped to [1, n - 1].
  auto expect = [](double n) { return std::min(n - 1, std::max(1.0, std::floor(n * 0.1 + 0.5))); };
  const auto dist = class_distribution(val);
  EXPECT_EQ(dist.at("HOF"), static_cast<std::size_t>(expect(669)));
  EXPECT_EQ(dist.at("NOT"), static_cast<std::size_t>(expect(1205)));
  EXPECT_NEAR(static_cast<double>(val.size()), 187.0, 1.0);
  EXPECT_EQ(train.size() + val.size(), d.size());
}

TEST(StratifiedSplit, HalfOfTwoAndTwo) {
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 4; ++i) ex.push_back({std::to_string(i), "x", i < 2 ? "HOF" : "NOT", {}});
  const Dataset d("s", LabelScheme::binary(), ex);
  const auto [train, val] = stratified_split(d, 0.5, 3);
  const auto dist = class_distribution(val);
  EXPECT_EQ(dist.at("HOF"), 1u);
  EXPECT_EQ(dist.at("NOT"), 1u);
}

TEST(StratifiedSplit, SingletonClassIsAnError) {
  std::vector<LabeledExample> ex{{"1", "x", "HOF", {}}, {"2", "y", "NOT", {}}, {"3", "z", "NOT", {}}};
  EXPECT_THROW(stratified_split(Dataset("s", LabelScheme::binary(), ex), 0.5, 1), Error);
}

TEST(StratifiedSplit, PropertyPartitionDeterminismAndProportion) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = random_fine(rng, 8 + rng.uniform_index(200));
    bool ok = true;
    for (auto c : class_distribution(d).counts) ok = ok && c != 1;
    if (!ok) continue;
    const double f = 0.05 + 0.9 * rng.uniform01();
    const std::uint64_t seed = rng.next();
    const auto [tr, va] = stratified_split(d, f, seed);
    const auto [tr2, va2] = stratified_split(d, f, seed);
    EXPECT_EQ(va.ids(), va2.ids());

    const auto train_ids = tr.ids();
    std::set<std::string> a(train_ids.begin(), train_ids.end());
    std::set<std::string> b;
    for (const auto& id : va.ids()) {
      EXPECT_EQ(a.count(id), 0u);
      b.insert(id);
    }
    EXPECT_EQ(a.size() + b.size(), d.size());

    const auto full = class_distribution(d);
    const auto vd = class_distribution(va);
    for (std::size_t c = 0; c < full.counts.size(); ++c) {
      if (full.counts[c] == 0) continue;
      EXPECT_LE(std::abs(static_cast<double>(vd.counts[c]) - f * full.counts[c]), 1.0);
    }
  }
}

TEST(FilterNonNone, CountIdentityOrderAndScheme) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = random_fine(rng, rng.uniform_index(60));
    const Dataset f = filter_non_none(d);
    EXPECT_EQ(f.scheme(), LabelScheme::ternary());
    EXPECT_EQ(f.size() + class_distribution(d).at("NONE"), d.size());
    std::vector<std::string> expected;
    for (const auto& e : d.examples()) {
      if (e.fine_label != "NONE") expected.push_back(e.id);
    }
    EXPECT_EQ(f.ids(), expected);
  }
}

TEST(FilterNonNone, Degenerates) {
  std::vector<LabeledExample> none{{"1", "a", {}, "NONE"}, {"2", "b", {}, "NONE"}};
  EXPECT_TRUE(filter_non_none(Dataset("n", LabelScheme::fine(), none)).empty());
  std::vector<LabeledExample> some{{"1", "a", {}, "HATE"}, {"2", "b", {}, "PRFN"}};
  EXPECT_EQ(filter_non_none(Dataset("s", LabelScheme::fine(), some)).size(), 2u);
  EXPECT_THROW(filter_non_none(Dataset("b", LabelScheme::binary(), {{"1", "a", "HOF", {}}})), Error);
}

TEST(OversampleMinority, BalancesClasses) {
  std::vector<LabeledExample> ex{{"1", "a", "HOF", {}}, {"2", "b", "NOT", {}},
                                 {"3", "c", "NOT", {}}, {"4", "d", "NOT", {}}};
  const auto o = oversample_minority(Dataset("o", LabelScheme::binary(), ex), 1);
  const auto dist = class_distribution(o);
  EXPECT_EQ(dist.at("HOF"), 3u);
  EXPECT_EQ(dist.at("NOT"), 3u);
}
