#include "hateclf/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hateclf/error.hpp"
#include "json.hpp"

namespace hateclf {

namespace {

std::vector<std::size_t> to_indices(const std::vector<std::string>& labels,
                                    const LabelScheme& scheme, std::string_view role) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto idx = scheme.index_of(labels[i]);
    if (!idx) {
      throw Error(ErrorKind::Validation, std::string(role) + " label '" + labels[i] +
                                             "' at position " + std::to_string(i) +
                                             " is not in scheme " + std::string(scheme.name()));
    }
    out.push_back(*idx);
  }
  return out;
}

void check_lengths(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorKind::Validation, "label lists differ in length (" +
                                           std::to_string(y_true.size()) + " true vs " +
                                           std::to_string(y_pred.size()) + " predicted)");
  }
  if (y_true.empty()) throw Error(ErrorKind::EmptyData, "no labels to evaluate");
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

const ClassMetrics& MetricsReport::of(std::string_view label) const {
  const auto idx = scheme.index_of(label);
  if (!idx) throw Error(ErrorKind::Validation, "label '" + std::string(label) + "' not in report");
  return per_class.at(*idx);
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (auto c : row) n += c;
  }
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
  return n;
}

std::string ConfusionMatrix::to_text() const {
  std::size_t label_w = 0;
  std::size_t cell_w = 1;
  for (const auto& l : labels) label_w = std::max(label_w, l.size());
  for (const auto& row : counts) {
    for (auto c : row) cell_w = std::max(cell_w, std::to_string(c).size());
  }
  std::ostringstream s;
  s << "# rows: true, columns: predicted, order:";
  for (const auto& l : labels) s << ' ' << l;
  s << '\n';
  for (std::size_t i = 0; i < counts.size(); ++i) {
    s << labels[i] << std::string(label_w - labels[i].size() + 1, ' ');
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      const std::string c = std::to_string(counts[i][j]);
      if (j > 0) s << ' ';
      s << std::string(cell_w - c.size(), ' ') << c;
    }
    s << '\n';
  }
  return s.str();
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& y_true,
                                 const std::vector<std::string>& y_pred,
                                 const LabelScheme& scheme) {
  check_lengths(y_true, y_pred);
  const auto t = to_indices(y_true, scheme, "true");
  const auto p = to_indices(y_pred, scheme, "predicted");
  ConfusionMatrix cm;
  cm.labels = scheme.labels();
  cm.counts.assign(scheme.size(), std::vector<std::size_t>(scheme.size(), 0));
  for (std::size_t i = 0; i < t.size(); ++i) ++cm.counts[t[i]][p[i]];
  return cm;
}

MetricsReport compute_metrics(const std::vector<std::string>& y_true,
                              const std::vector<std::string>& y_pred, const LabelScheme& scheme) {
  const ConfusionMatrix cm = confusion_matrix(y_true, y_pred, scheme);
  const std::size_t k = scheme.size();
  MetricsReport r;
  r.scheme = scheme;
  r.count = y_true.size();
  r.accuracy = ratio(cm.trace(), r.count);
  r.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += cm.counts[o][c];
      actual += cm.counts[c][o];
    }
    const std::size_t tp = cm.counts[c][c];
    ClassMetrics& m = r.per_class[c];
    m.support = actual;
    m.precision = ratio(tp, predicted);
    m.recall = ratio(tp, actual);
    const double denom = m.precision + m.recall;
    m.f1 = denom > 0.0 ? 2.0 * m.precision * m.recall / denom : 0.0;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  r.macro_precision /= static_cast<double>(k);
  r.macro_recall /= static_cast<double>(k);
  r.macro_f1 /= static_cast<double>(k);
  return r;
}

std::string report_to_json(const MetricsReport& r) {
  std::ostringstream s;
  s << "{\n";
  s << "  \"scheme\": \"" << r.scheme.name() << "\",\n";
  s << "  \"labels\": [";
  for (std::size_t i = 0; i < r.scheme.size(); ++i) {
    s << (i ? ", " : "") << nlohmann::json(r.scheme.label(i)).dump();
  }
  s << "],\n";
  s << "  \"count\": " << r.count << ",\n";
  s << "  \"accuracy\": " << fixed6(r.accuracy) << ",\n";
  s << "  \"macro_precision\": " << fixed6(r.macro_precision) << ",\n";
  s << "  \"macro_recall\": " << fixed6(r.macro_recall) << ",\n";
  s << "  \"macro_f1\": " << fixed6(r.macro_f1) << ",\n";
  s << "  \"per_class\": {";
  for (std::size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& m = r.per_class[i];
    s << (i ? ",\n" : "\n") << "    " << nlohmann::json(r.scheme.label(i)).dump()
      << ": {\"precision\": " << fixed6(m.precision) << ", \"recall\": " << fixed6(m.recall)
      << ", \"f1\": " << fixed6(m.f1) << ", \"support\": " << m.support << "}";
  }
  s << "\n  },\n";
  s << "  \"metadata\": {";
  std::size_t i = 0;
  for (const auto& [key, value] : r.metadata) {
    s << (i++ ? ",\n" : "\n") << "    " << nlohmann::json(key).dump() << ": "
      << nlohmann::json(value).dump();
  }
  s << (r.metadata.empty() ? "}\n" : "\n  }\n");
  s << "}\n";
  return s.str();
}

MetricsReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.scheme = LabelScheme(scheme_kind_from_string(j.at("scheme").get<std::string>()),
                           j.at("labels").get<std::vector<std::string>>());
    r.count = j.at("count").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_precision = j.at("macro_precision").get<double>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    for (const auto& l : r.scheme.labels()) {
      const auto& m = j.at("per_class").at(l);
      r.per_class.push_back(ClassMetrics{m.at("precision").get<double>(),
                                         m.at("recall").get<double>(), m.at("f1").get<double>(),
                                         m.at("support").get<std::size_t>()});
    }
    if (j.contains("metadata")) {
      r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("malformed metrics report: ") + e.what());
  }
}

std::string format_report(const MetricsReport& r) {
  auto f3 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  std::size_t w = 9;
  for (const auto& l : r.scheme.labels()) w = std::max(w, l.size());
  auto pad = [w](const std::string& s) { return s + std::string(w - s.size() + 2, ' '); };
  std::ostringstream s;
  s << pad("class") << "precision  recall  f1     support\n";
  for (std::size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& m = r.per_class[i];
    s << pad(r.scheme.label(i)) << f3(m.precision) << "      " << f3(m.recall) << "   "
      << f3(m.f1) << "  " << m.support << "\n";
  }
  s << pad("macro") << f3(r.macro_precision) << "      " << f3(r.macro_recall) << "   "
    << f3(r.macro_f1) << "  " << r.count << "\n";
  s << pad("accuracy") << f3(r.accuracy) << "\n";
  return s.str();
}

}  // namespace hateclf
