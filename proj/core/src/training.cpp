#include "hateclf/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "hateclf/error.hpp"
#include "hateclf/nn/adam.hpp"
#include "json.hpp"

namespace hateclf {

TrainConfig TrainConfig::defaults_for(Architecture architecture) {
  TrainConfig c;
  if (architecture == Architecture::Transformer) {
    c.learning_rate = 5e-5;
    c.max_epochs = 5;
  }
  return c;
}

void TrainConfig::validate() const {
  std::vector<std::string> problems;
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    problems.push_back("learning_rate must be > 0");
  }
  if (max_epochs < 1) problems.push_back("max_epochs must be >= 1");
  if (batch_size < 1) problems.push_back("batch_size must be >= 1");
  if (problems.empty()) return;
  std::string msg = "invalid training config:";
  for (const auto& p : problems) msg += " " + p + ";";
  msg.pop_back();
  throw Error(ErrorKind::Config, msg);
}

std::string TrainResult::history_json() const {
  nlohmann::ordered_json j;
  j["best_epoch"] = best_epoch;
  auto& epochs = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& r : history) {
    epochs.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss},
                      {"val_accuracy", r.val_accuracy}});
  }
  return j.dump(2) + "\n";
}

int select_best_epoch(std::span<const double> val_accuracies) {
  if (val_accuracies.empty()) throw Error(ErrorKind::Training, "empty validation history");
  std::size_t best = 0;
  for (std::size_t i = 1; i < val_accuracies.size(); ++i) {
    if (val_accuracies[i] > val_accuracies[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

double softmax_cross_entropy(const nn::Matrix& logits, std::span<const std::size_t> targets,
                             nn::Matrix* grad) {
  const Eigen::Index n = logits.rows();
  double loss = 0.0;
  if (grad) grad->resize(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const float mx = logits.row(i).maxCoeff();
    const Eigen::ArrayXf shifted = (logits.row(i).array() - mx).transpose();
    const double lse = std::log(static_cast<double>(shifted.exp().sum()));
    const auto y = static_cast<Eigen::Index>(targets[static_cast<std::size_t>(i)]);
    loss += lse - shifted(y);
    if (grad) {
      grad->row(i) = (shifted - static_cast<float>(lse)).exp().matrix().transpose();
      (*grad)(i, y) -= 1.0f;
    }
  }
  if (grad) *grad /= static_cast<float>(n);
  return loss / static_cast<double>(n);
}

std::vector<std::size_t> predict_indices(const ClassifierModel& model,
                                         std::span<const std::string> texts,
                                         std::size_t batch_size) {
  std::vector<std::size_t> out;
  out.reserve(texts.size());
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t start = 0; start < texts.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, texts.size() - start);
    const auto idx = argmax_rows(model.forward_texts(texts.subspan(start, n)));
    out.insert(out.end(), idx.begin(), idx.end());
  }
  return out;
}

std::vector<std::string> predict(const ClassifierModel& model, const Dataset& data,
                                 std::size_t batch_size) {
  const auto texts = data.texts();
  const auto idx = predict_indices(model, texts, batch_size);
  std::vector<std::string> labels;
  labels.reserve(idx.size());
  for (auto i : idx) labels.push_back(model.label_scheme().label(i));
  return labels;
}

double accuracy(const ClassifierModel& model, const Dataset& data) {
  if (data.empty()) throw Error(ErrorKind::EmptyData, "accuracy of an empty dataset");
  const auto texts = data.texts();
  const auto idx = predict_indices(model, texts);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] == data.label_index(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(idx.size());
}

namespace {

void check_split(const ClassifierModel& model, const Dataset& d, std::string_view role) {
  if (!d.labeled()) {
    throw Error(ErrorKind::Validation, std::string(role) + " set '" + d.split_name() +
                                           "' is unlabeled");
  }
  if (!(d.scheme() == model.label_scheme())) {
    throw Error(ErrorKind::Validation,
                std::string(role) + " set uses scheme " + std::string(d.scheme().name()) +
                    " but the model predicts " + std::string(model.label_scheme().name()));
  }
}

}  // namespace

TrainResult train(ClassifierModel& model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  check_split(model, train_set, "training");
  check_split(model, val_set, "validation");
  if (train_set.empty()) throw Error(ErrorKind::EmptyData, "training set is empty");
  if (val_set.empty()) throw Error(ErrorKind::EmptyData, "validation set is empty");

  const Dataset data = cfg.oversample_minority
                           ? oversample_minority(train_set, derive_seed(cfg.seed, "oversample"))
                           : train_set;
  const auto texts = data.texts();
  const nn::IndexBatch all = model.encode_texts(texts);
  std::vector<std::size_t> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) targets[i] = data.label_index(i);

  nn::Adam optimizer(model.parameters(),
                     nn::AdamOptions{static_cast<float>(cfg.learning_rate)});
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  double best_acc = -1.0;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      const std::size_t n = std::min(batch, order.size() - start);
      nn::IndexBatch xb;
      xb.batch = static_cast<int>(n);
      xb.steps = all.steps;
      xb.ids.reserve(n * static_cast<std::size_t>(all.steps));
      std::vector<std::size_t> yb(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t row = order[start + k];
        const auto first = all.ids.begin() + static_cast<std::ptrdiff_t>(row * all.steps);
        xb.ids.insert(xb.ids.end(), first, first + all.steps);
        yb[k] = targets[row];
      }
      std::unique_ptr<ForwardState> state;
      const nn::Matrix logits = model.train_logits(xb, dropout_rng, state);
      nn::Matrix grad;
      const double loss = softmax_cross_entropy(logits, yb, &grad);
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::Training, "non-finite loss at epoch " + std::to_string(epoch) +
                                             ", batch " + std::to_string(b));
      }
      loss_sum += loss * static_cast<double>(n);
      optimizer.zero_grad();
      model.backward(grad, *state);
      optimizer.step();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_accuracy = hooks.val_scorer ? hooks.val_scorer(model, epoch) : accuracy(model, val_set);
    result.history.push_back(rec);

    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      result.best_epoch = epoch;
      result.best_model = model.clone();
      if (cfg.checkpoint_dir) result.best_model->save(*cfg.checkpoint_dir);
    }
    if (hooks.log) {
      std::ostringstream line;
      line << std::fixed << std::setprecision(6) << "epoch=" << epoch
           << " loss=" << rec.train_loss << " val_acc=" << rec.val_accuracy << "\n";
      *hooks.log << line.str() << std::flush;
    }
  }

  std::vector<double> accs;
  for (const auto& r : result.history) accs.push_back(r.val_accuracy);
  if (select_best_epoch(accs) != result.best_epoch) {
    throw Error(ErrorKind::Training, "best-epoch bookkeeping mismatch");
  }
  return result;
}

}  // namespace hateclf
