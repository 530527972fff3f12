#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hateclf/labels.hpp"

namespace hateclf {

struct LabeledExample {
  std::string id;
  std::string text;
  std::optional<std::string> binary_label;
  std::optional<std::string> fine_label;  // FINE or TERNARY label

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct ColumnNames {
  std::string id = "tweet_id";
  std::string text = "text";
  std::string binary = "task_1";
  std::string fine = "task_2";
};

/// Immutable-by-convention collection of examples under one label scheme.
/// Either every example carries a label of `scheme`, or `labeled()` is false.
class Dataset {
 public:
  Dataset(std::string split_name, LabelScheme scheme, std::vector<LabeledExample> examples,
          bool labeled = true);

  const std::string& split_name() const { return split_name_; }
  const LabelScheme& scheme() const { return scheme_; }
  const std::vector<LabeledExample>& examples() const { return examples_; }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  bool labeled() const { return labeled_; }

  // Label of example i under this dataset's scheme (throws if unlabeled).
  const std::string& label(std::size_t i) const;
  std::size_t label_index(std::size_t i) const;
  std::vector<std::string> labels() const;
  std::vector<std::string> texts() const;
  std::vector<std::string> ids() const;

 private:
  std::string split_name_;
  LabelScheme scheme_;
  std::vector<LabeledExample> examples_;
  bool labeled_;
};

// Loads a tab- or comma-separated file. `task_column` names the column holding
// labels of `scheme`; pass std::nullopt for an unlabeled (test-time) file.
// For FINE/TERNARY loads the binary column is read too when present and
// checked for consistency (NONE <=> NOT).
Dataset load_dataset(const std::filesystem::path& path, const LabelScheme& scheme,
                     const std::optional<std::string>& task_column,
                     const ColumnNames& columns = {});

// Writes a TSV that load_dataset reads back to an equal dataset.
void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const ColumnNames& columns = {});

struct ClassDistribution {
  LabelScheme scheme = LabelScheme::binary();
  std::vector<std::size_t> counts;  // scheme order

  std::size_t at(std::string_view label) const;
  std::size_t total() const;
  std::string to_json() const;  // {"HOF":669,"NOT":1205}
};

ClassDistribution class_distribution(const Dataset& d);

// Same examples viewed under the BINARY scheme (HOF/NOT derived from the fine
// label where no binary label was loaded).
Dataset binary_view(const Dataset& d);

// Per-class proportional split; each class contributes round(n_c * fraction)
// examples to validation, clamped to [1, n_c - 1]. Relative order is kept.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double val_fraction,
                                             std::uint64_t seed);

// Drops NONE examples from a FINE dataset; result uses the TERNARY scheme.
Dataset filter_non_none(const Dataset& d);

// Duplicates minority-class examples until every class matches the majority.
Dataset oversample_minority(const Dataset& d, std::uint64_t seed);

}  // namespace hateclf
