#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hateclf/dataset.hpp"
#include "hateclf/models.hpp"

namespace hateclf {

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 30;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool oversample_minority = false;
  // When set, the best snapshot is written here each time it improves.
  std::optional<std::filesystem::path> checkpoint_dir;

  // 1e-3 / 30 epochs for the basic models, 5e-5 / 5 epochs for transformers.
  static TrainConfig defaults_for(Architecture architecture);
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 1-based
  std::unique_ptr<ClassifierModel> best_model;

  const EpochRecord& best() const { return history.at(static_cast<std::size_t>(best_epoch - 1)); }
  std::string history_json() const;
};

// Earliest epoch (1-based) with the maximum validation accuracy.
int select_best_epoch(std::span<const double> val_accuracies);

struct TrainHooks {
  std::ostream* log = nullptr;
  // Replaces validation-set accuracy when set; receives the 1-based epoch.
  std::function<double(const ClassifierModel&, int)> val_scorer;
};

// Runs exactly cfg.max_epochs epochs of shuffled minibatch Adam on softmax
// cross-entropy and returns a copy of the model from the best epoch. `model`
// itself is left at its final-epoch state.
TrainResult train(ClassifierModel& model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

// One label of the model's scheme per example, in input order.
std::vector<std::string> predict(const ClassifierModel& model, const Dataset& data,
                                 std::size_t batch_size = 64);
std::vector<std::size_t> predict_indices(const ClassifierModel& model,
                                         std::span<const std::string> texts,
                                         std::size_t batch_size = 64);

double accuracy(const ClassifierModel& model, const Dataset& data);

// Mean softmax cross-entropy of logits against class indices, and its
// gradient with respect to the logits.
double softmax_cross_entropy(const nn::Matrix& logits, std::span<const std::size_t> targets,
                             nn::Matrix* grad);

}  // namespace hateclf
