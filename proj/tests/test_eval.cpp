#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "hateclf/error.hpp"
#include "hateclf/eval.hpp"
#include "hateclf/rng.hpp"
#include "support.hpp"

namespace hateclf {
namespace {

using testing::TempDir;

TEST(Metrics, WorkedBinaryExample) {
  const std::vector<std::string> y{"HOF", "NOT", "HOF", "NOT"};
  const std::vector<std::string> p{"HOF", "HOF", "HOF", "NOT"};
  const auto r = compute_metrics(y, p, LabelScheme::binary());
  EXPECT_EQ(r.count, 4u);
  EXPECT_NEAR(r.accuracy, 0.75, 1e-9);
  EXPECT_NEAR(r.macro_precision, 0.833333, 1e-6);
  EXPECT_NEAR(r.macro_recall, 0.75, 1e-9);
  EXPECT_NEAR(r.macro_f1, 0.733333, 1e-6);
  EXPECT_NEAR(r.of("HOF").precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.of("NOT").recall, 0.5, 1e-12);
  EXPECT_EQ(r.of("NOT").support, 2u);

  const auto cm = confusion_matrix(y, p, LabelScheme::binary());
  EXPECT_EQ(cm.labels, (std::vector<std::string>{"HOF", "NOT"}));
  EXPECT_EQ(cm.counts, (std::vector<std::vector<std::size_t>>{{2, 0}, {1, 1}}));
  const std::string text = cm.to_text();
  EXPECT_NE(text.find("HOF 2 0"), std::string::npos);
  EXPECT_NE(text.find("NOT 1 1"), std::string::npos);
}

TEST(Metrics, ZeroDivisionAndZeroSupport) {
  const std::vector<std::string> y{"NONE", "NONE", "HATE"};
  const std::vector<std::string> p{"NONE", "NONE", "NONE"};
  const auto r = compute_metrics(y, p, LabelScheme::fine());
  EXPECT_EQ(r.per_class.size(), 4u);
  EXPECT_EQ(r.of("HATE").precision, 0.0);
  EXPECT_EQ(r.of("HATE").f1, 0.0);
  EXPECT_EQ(r.of("PRFN").support, 0u);
  EXPECT_EQ(r.of("PRFN").f1, 0.0);
  // Macro averages include the zero-support classes.
  const double f1_none = 2 * (2.0 / 3.0) * 1.0 / (2.0 / 3.0 + 1.0);
  EXPECT_NEAR(r.macro_f1, f1_none / 4.0, 1e-12);
}

TEST(Metrics, InputErrors) {
  EXPECT_THROW(compute_metrics({"HOF"}, {"HOF", "NOT"}, LabelScheme::binary()), Error);
  EXPECT_THROW(compute_metrics({}, {}, LabelScheme::binary()), Error);
  EXPECT_THROW(compute_metrics({"HOF"}, {"HATE"}, LabelScheme::binary()), Error);
  try {
    confusion_matrix({"HOF"}, {}, LabelScheme::binary());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
}

struct Oracle {
  double accuracy, mp, mr, mf;
  std::vector<double> p, r, f;
  std::vector<std::size_t> support;
};

Oracle oracle(const std::vector<std::string>& y, const std::vector<std::string>& yhat,
              const std::vector<std::string>& labels) {
  Oracle o{};
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += y[i] == yhat[i];
  o.accuracy = static_cast<double>(hits) / static_cast<double>(y.size());
  for (const auto& c : labels) {
    double tp = 0, fp = 0, fn = 0;
    std::size_t sup = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const bool t = y[i] == c, q = yhat[i] == c;
      tp += t && q;
      fp += !t && q;
      fn += t && !q;
      sup += t;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    o.p.push_back(prec);
    o.r.push_back(rec);
    o.f.push_back(f1);
    o.support.push_back(sup);
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  o.mp = mean(o.p);
  o.mr = mean(o.r);
  o.mf = mean(o.f);
  return o;
}

TEST(Metrics, AgreesWithOracleOnRandomCases) {
  Rng rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelScheme scheme =
        LabelScheme::of(trial % 3 == 0 ? SchemeKind::Binary
                                       : (trial % 3 == 1 ? SchemeKind::Fine : SchemeKind::Ternary));
    const std::size_t n = 1 + rng.uniform_index(60);
    std::vector<std::string> y, p;
    for (std::size_t i = 0; i < n; ++i) {
      y.push_back(scheme.label(rng.uniform_index(scheme.size())));
      p.push_back(scheme.label(rng.uniform_index(scheme.size())));
    }
    const auto r = compute_metrics(y, p, scheme);
    const auto o = oracle(y, p, scheme.labels());
    EXPECT_NEAR(r.accuracy, o.accuracy, 1e-9);
    EXPECT_NEAR(r.macro_precision, o.mp, 1e-9);
    EXPECT_NEAR(r.macro_recall, o.mr, 1e-9);
    EXPECT_NEAR(r.macro_f1, o.mf, 1e-9);
    std::size_t support = 0;
    for (std::size_t c = 0; c < scheme.size(); ++c) {
      EXPECT_NEAR(r.per_class[c].precision, o.p[c], 1e-9);
      EXPECT_NEAR(r.per_class[c].recall, o.r[c], 1e-9);
      EXPECT_NEAR(r.per_class[c].f1, o.f[c], 1e-9);
      EXPECT_EQ(r.per_class[c].support, o.support[c]);
      support += r.per_class[c].support;
    }
    EXPECT_EQ(support, n);

    const auto cm = confusion_matrix(y, p, scheme);
    EXPECT_EQ(cm.total(), n);
    EXPECT_NEAR(r.accuracy, static_cast<double>(cm.trace()) / static_cast<double>(cm.total()),
                1e-12);
    for (std::size_t c = 0; c < scheme.size(); ++c) {
      std::size_t row = 0;
      for (auto v : cm.counts[c]) row += v;
      EXPECT_EQ(row, r.per_class[c].support);
    }
  }
}

TEST(Metrics, RelabellingPermutesPerClassScores) {
  Rng rng(5);
  const LabelScheme scheme = LabelScheme::fine();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> perm{0, 1, 2, 3};
    rng.shuffle(perm);
    std::vector<std::string> y, p, y2, p2;
    for (int i = 0; i < 30; ++i) {
      const auto a = rng.uniform_index(4), b = rng.uniform_index(4);
      y.push_back(scheme.label(a));
      p.push_back(scheme.label(b));
      y2.push_back(scheme.label(perm[a]));
      p2.push_back(scheme.label(perm[b]));
    }
    const auto r = compute_metrics(y, p, scheme);
    const auto r2 = compute_metrics(y2, p2, scheme);
    EXPECT_NEAR(r.accuracy, r2.accuracy, 1e-12);
    EXPECT_NEAR(r.macro_f1, r2.macro_f1, 1e-12);
    EXPECT_NEAR(r.macro_precision, r2.macro_precision, 1e-12);
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(r.per_class[c].f1, r2.per_class[perm[c]].f1, 1e-12);
      EXPECT_EQ(r.per_class[c].support, r2.per_class[perm[c]].support);
    }
  }
}

TEST(Report, JsonRoundTripAndFormatting) {
  MetricsReport r = compute_metrics({"NONE", "HATE", "OFFN"}, {"NONE", "OFFN", "OFFN"},
                                    LabelScheme::fine());
  r.accuracy = 0.8591234;
  r.metadata["split"] = "test";
  const std::string j = report_to_json(r);
  EXPECT_NE(j.find("0.859123"), std::string::npos);
  EXPECT_EQ(j.find("0.8591234"), std::string::npos);
  EXPECT_NE(j.find("\"PRFN\""), std::string::npos);
  EXPECT_NE(j.find("\"macro_f1\""), std::string::npos);

  const MetricsReport back = report_from_json(j);
  EXPECT_EQ(back.scheme, r.scheme);
  EXPECT_EQ(back.count, r.count);
  EXPECT_NEAR(back.accuracy, 0.859123, 1e-12);
  EXPECT_NEAR(back.macro_f1, r.macro_f1, 5e-7);
  EXPECT_EQ(back.metadata, r.metadata);
  ASSERT_EQ(back.per_class.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(back.per_class[c].f1, r.per_class[c].f1, 5e-7);
    EXPECT_EQ(back.per_class[c].support, r.per_class[c].support);
  }
  EXPECT_EQ(report_to_json(back), j);

  const std::string table = format_report(r);
  EXPECT_NE(table.find("0.859"), std::string::npos);
  EXPECT_NE(table.find("PRFN"), std::string::npos);
}

TEST(Render, PngSvgAndText) {
  const std::vector<std::string> y{"NONE", "HATE", "OFFN", "PRFN", "NONE", "HATE"};
  const std::vector<std::string> p{"NONE", "OFFN", "OFFN", "PRFN", "HATE", "HATE"};
  const auto cm = confusion_matrix(y, p, LabelScheme::fine());
  TempDir tmp;

  render_confusion_matrix(cm, tmp / "cm.png");
  const std::string png = testing::read_text(tmp / "cm.png");
  ASSERT_GT(png.size(), 24u);
  EXPECT_EQ(png.substr(1, 3), "PNG");
  EXPECT_TRUE(std::filesystem::exists(tmp / "cm.txt"));
  EXPECT_EQ(testing::read_text(tmp / "cm.txt"), cm.to_text());

  render_confusion_matrix(cm, tmp / "cm.svg");
  const std::string svg = testing::read_text(tmp / "cm.svg");
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("class=\"xtick\""), 4u);
  EXPECT_EQ(count("class=\"ytick\""), 4u);
  for (const char* l : {"NONE", "HATE", "OFFN", "PRFN"}) {
    EXPECT_NE(svg.find(std::string(">") + l + "<"), std::string::npos) << l;
  }

  try {
    render_confusion_matrix(cm, tmp / "cm.gif");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  testing::write_text(tmp / "file", "x");
  try {
    render_confusion_matrix(cm, tmp / "file" / "cm.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

}  // namespace
}  // namespace hateclf
