#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hateclf/config.hpp"
#include "hateclf/dataset.hpp"
#include "hateclf/eval.hpp"

namespace hateclf {

enum class RunMode { Full, TrainOnly };

struct RunOutcome {
  std::filesystem::path dir;
  std::string evaluated_on;              // "test" or "validation"
  std::optional<MetricsReport> report;   // absent in TrainOnly mode
  std::optional<ConfusionMatrix> confusion;
};

// Trains, predicts and evaluates as configured and fills cfg.out_dir with:
// config.txt, vocab.tsv, training.log, history.json, model/, predictions.tsv,
// metrics.json, confusion.<png|svg> (+ .txt), trace.tsv (hierarchical only)
// and manifest.json.
RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr,
                          RunMode mode = RunMode::Full);

struct IngestStats {
  ClassDistribution distribution;
  std::size_t examples = 0;
  double avg_words = 0.0;   // whitespace-separated words
  double avg_tokens = 0.0;  // tokenizer output

  std::string to_text() const;
};

IngestStats ingest_stats(const std::filesystem::path& path, SchemeKind scheme,
                         const ColumnNames& columns = {});

struct Evaluation {
  MetricsReport report;
  ConfusionMatrix confusion;
};

// Reads two `id<TAB>label` files (an optional header row is skipped; full
// dataset files with the id and label columns are accepted as well), aligns
// them by id and scores them.
Evaluation evaluate_files(const std::filesystem::path& gold, const std::filesystem::path& pred,
                          const LabelScheme& scheme, const ColumnNames& columns = {});

// Predicts every example of `input` with a saved model (single or
// hierarchical) and writes `id<TAB>label` rows; hierarchical models also
// write <out stem>.trace.tsv.
std::size_t predict_file(const std::filesystem::path& model_dir,
                         const std::filesystem::path& input, const std::filesystem::path& out,
                         const ColumnNames& columns = {});

}  // namespace hateclf
