#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "hateclf/dataset.hpp"
#include "hateclf/models.hpp"
#include "hateclf/training.hpp"

namespace hateclf {

/// Binary HOF/NOT gate followed by a HATE/OFFN/PRFN refiner.
class HierarchicalModel {
 public:
  HierarchicalModel(std::unique_ptr<ClassifierModel> stage1, std::unique_ptr<ClassifierModel> stage2);

  const ClassifierModel& stage1() const { return *stage1_; }
  const ClassifierModel& stage2() const { return *stage2_; }

  void save(const std::filesystem::path& dir) const;  // dir/stage1, dir/stage2
  static HierarchicalModel load(const std::filesystem::path& dir);

 private:
  std::unique_ptr<ClassifierModel> stage1_;
  std::unique_ptr<ClassifierModel> stage2_;
};

// Builds an untrained model for the given scheme from the examples it will be
// trained on (vocabulary, embeddings).
using ModelFactory =
    std::function<std::unique_ptr<ClassifierModel>(const Dataset& train_set, const LabelScheme&)>;

struct HierarchicalTraining {
  HierarchicalModel model;
  TrainResult stage1;
  TrainResult stage2;
};

// Stage 1 trains on the BINARY view of `train`; stage 2 on filter_non_none(train)
// with epoch selection on filter_non_none(val).
HierarchicalTraining train_hierarchical(const Dataset& train, const Dataset& val,
                                        const TrainConfig& cfg1, const TrainConfig& cfg2,
                                        const ModelFactory& factory,
                                        std::ostream* log = nullptr);

struct StageTrace {
  std::string id;
  std::string stage1;
  std::string stage2;  // empty when the gate said NOT
  std::string final_label;
};

struct HierarchicalPrediction {
  std::vector<std::string> labels;  // FINE labels
  std::vector<StageTrace> trace;
};

HierarchicalPrediction hierarchical_predict(const HierarchicalModel& h, const Dataset& data);

std::vector<std::string> direct_multiclass_predict(const ClassifierModel& model,
                                                   const Dataset& data);

// `id<TAB>label` rows, no header.
void write_predictions(const std::filesystem::path& path, const std::vector<std::string>& ids,
                       const std::vector<std::string>& labels);
// Header `id	stage1	stage2	final`; a missing stage-2 label is written as "-".
void write_trace(const std::filesystem::path& path, const std::vector<StageTrace>& trace);

}  // namespace hateclf
