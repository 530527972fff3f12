#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hateclf/dataset.hpp"
#include "hateclf/embeddings.hpp"
#include "hateclf/models.hpp"
#include "hateclf/training.hpp"

namespace hateclf {

enum class Task { Binary, FineDirect, FineHierarchical };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

struct ExperimentConfig {
  Task task = Task::Binary;
  std::filesystem::path train_path;
  std::optional<std::filesystem::path> test_path;
  ColumnNames columns;
  double val_fraction = 0.1;

  Architecture architecture = Architecture::Cnn;
  EmbeddingMode embedding_mode = EmbeddingMode::Random;
  std::optional<std::filesystem::path> vectors_path;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  std::size_t min_freq = 1;
  std::string checkpoint;  // transformer only
  ModelOptions model;

  // Unset values take the architecture defaults of TrainConfig.
  std::optional<double> learning_rate;
  std::optional<int> max_epochs;
  int batch_size = 32;
  bool oversample_minority = false;

  std::filesystem::path out_dir = "run";
  std::uint64_t seed = 42;
  std::string image_format = "png";

  TrainConfig train_config() const;
  const LabelScheme& scheme() const;  // BINARY or FINE
  const std::string& label_column() const;
};

// Flat `key = value` lines; '#' starts a comment. Later keys win.
using ConfigValues = std::map<std::string, std::string>;

ConfigValues parse_config_text(std::string_view text, std::string_view source = "<config>");
ConfigValues read_config_file(const std::filesystem::path& path);

// Builds a config from defaults plus `values`. Every problem (unknown key,
// bad value, failed validation) is reported in one Config error.
ExperimentConfig resolve_config(const ConfigValues& values);

// Semantic checks; returns one message per violation.
std::vector<std::string> config_violations(const ExperimentConfig& cfg);

// Complete, canonical key = value text. resolve_config(parse_config_text(...))
// of this text yields the same config.
std::string config_to_text(const ExperimentConfig& cfg);

}  // namespace hateclf
