#include "hateclf/pipeline.hpp"

#include <fstream>

#include "hateclf/delimited.hpp"
#include "hateclf/error.hpp"

namespace hateclf {

namespace fs = std::filesystem;

HierarchicalModel::HierarchicalModel(std::unique_ptr<ClassifierModel> stage1,
                                     std::unique_ptr<ClassifierModel> stage2)
    : stage1_(std::move(stage1)), stage2_(std::move(stage2)) {
  if (!stage1_ || !stage2_) throw Error(ErrorKind::Config, "hierarchical model needs two stages");
  if (!(stage1_->label_scheme() == LabelScheme::binary())) {
    throw Error(ErrorKind::Config, "stage 1 must predict the BINARY scheme");
  }
  if (!(stage2_->label_scheme() == LabelScheme::ternary())) {
    throw Error(ErrorKind::Config, "stage 2 must predict the TERNARY scheme");
  }
}

void HierarchicalModel::save(const fs::path& dir) const {
  stage1_->save(dir / "stage1");
  stage2_->save(dir / "stage2");
}

HierarchicalModel HierarchicalModel::load(const fs::path& dir) {
  return HierarchicalModel(load_model(dir / "stage1"), load_model(dir / "stage2"));
}

HierarchicalTraining train_hierarchical(const Dataset& train, const Dataset& val,
                                        const TrainConfig& cfg1, const TrainConfig& cfg2,
                                        const ModelFactory& factory, std::ostream* log) {
  if (train.scheme().kind() != SchemeKind::Fine || val.scheme().kind() != SchemeKind::Fine) {
    throw Error(ErrorKind::Validation, "hierarchical training needs FINE-labeled data");
  }
  const Dataset train1 = binary_view(train);
  const Dataset val1 = binary_view(val);
  const Dataset train2 = filter_non_none(train);
  const Dataset val2 = filter_non_none(val);
  if (train2.empty()) {
    throw Error(ErrorKind::EmptyData, "stage 2 has no training examples (every label is NONE)");
  }
  if (val2.empty()) {
    throw Error(ErrorKind::EmptyData, "stage 2 has no validation examples (every label is NONE)");
  }

  auto m1 = factory(train1, LabelScheme::binary());
  if (log) *log << "stage=1 examples=" << train1.size() << "\n";
  TrainResult r1 = hateclf::train(*m1, train1, val1, cfg1, TrainHooks{log, {}});

  auto m2 = factory(train2, LabelScheme::ternary());
  if (log) *log << "stage=2 examples=" << train2.size() << "\n";
  TrainResult r2 = hateclf::train(*m2, train2, val2, cfg2, TrainHooks{log, {}});

  HierarchicalModel h(r1.best_model->clone(), r2.best_model->clone());
  return HierarchicalTraining{std::move(h), std::move(r1), std::move(r2)};
}

HierarchicalPrediction hierarchical_predict(const HierarchicalModel& h, const Dataset& data) {
  HierarchicalPrediction out;
  if (data.empty()) return out;
  const auto texts = data.texts();
  const auto gate = predict_indices(h.stage1(), texts);
  const auto hof = *LabelScheme::binary().index_of(label::kHof);

  std::vector<std::string> gated_texts;
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (gate[i] == hof) gated_texts.push_back(texts[i]);
  }
  const auto refined = predict_indices(h.stage2(), gated_texts);

  out.labels.reserve(data.size());
  out.trace.reserve(data.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < gate.size(); ++i) {
    StageTrace t;
    t.id = data[i].id;
    t.stage1 = h.stage1().label_scheme().label(gate[i]);
    if (gate[i] == hof) {
      t.stage2 = h.stage2().label_scheme().label(refined[k++]);
      t.final_label = t.stage2;
    } else {
      t.final_label = std::string(label::kNone);
    }
    out.labels.push_back(t.final_label);
    out.trace.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> direct_multiclass_predict(const ClassifierModel& model,
                                                   const Dataset& data) {
  if (!(model.label_scheme() == LabelScheme::fine())) {
    throw Error(ErrorKind::Validation, "direct multiclass prediction needs a FINE 4-class model, got " +
                                           std::string(model.label_scheme().name()));
  }
  return predict(model, data);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_predictions(const fs::path& path, const std::vector<std::string>& ids,
                       const std::vector<std::string>& labels) {
  if (ids.size() != labels.size()) {
    throw Error(ErrorKind::Input, "prediction ids and labels differ in length");
  }
  auto out = open_out(path);
  for (std::size_t i = 0; i < ids.size(); ++i) write_delimited_row(out, {ids[i], labels[i]}, '\t');
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void write_trace(const fs::path& path, const std::vector<StageTrace>& trace) {
  auto out = open_out(path);
  write_delimited_row(out, {"id", "stage1", "stage2", "final"}, '\t');
  for (const auto& t : trace) {
    write_delimited_row(out, {t.id, t.stage1, t.stage2.empty() ? "-" : t.stage2, t.final_label},
                        '\t');
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace hateclf
