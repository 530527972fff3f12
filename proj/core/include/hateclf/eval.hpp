#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hateclf/labels.hpp"

namespace hateclf {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct MetricsReport {
  LabelScheme scheme = LabelScheme::binary();
  std::size_t count = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;  // scheme order
  std::map<std::string, std::string> metadata;

  const ClassMetrics& of(std::string_view label) const;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Rows are true labels, columns predicted labels, both in scheme order.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
  // Right-aligned integer grid preceded by row labels, e.g. "HOF 2 0".
  std::string to_text() const;
};

// Macro averages run over every scheme label, zero-support classes included.
// A 0/0 precision, recall or F1 is 0.
MetricsReport compute_metrics(const std::vector<std::string>& y_true,
                              const std::vector<std::string>& y_pred, const LabelScheme& scheme);

ConfusionMatrix confusion_matrix(const std::vector<std::string>& y_true,
                                 const std::vector<std::string>& y_pred,
                                 const LabelScheme& scheme);

// All numbers with 6 decimals.
std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(std::string_view text);

// Human-readable table with 3 decimals.
std::string format_report(const MetricsReport& r);

// Heatmap with labelled axes and cell counts. The format follows the
// extension (.svg or .png); a plain-text table is written next to it with
// the extension replaced by .txt.
void render_confusion_matrix(const ConfusionMatrix& cm, const std::filesystem::path& path);

}  // namespace hateclf
