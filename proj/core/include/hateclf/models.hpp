#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hateclf/embeddings.hpp"
#include "hateclf/labels.hpp"
#include "hateclf/nn/layers.hpp"
#include "hateclf/nn/tensor.hpp"
#include "hateclf/rng.hpp"

namespace hateclf {

enum class Architecture { Cnn, Lstm, BiLstm, Transformer };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view name);

enum class CnnDropoutPlacement { AfterFirstPool, AfterSecondPool };

/// Layer widths and rates.
struct ModelOptions {
  std::size_t max_len = 32;
  std::uint64_t init_seed = 0;

  int cnn_filters = 300;
  int cnn_kernel = 3;
  int cnn_pool = 2;
  int cnn_dense = 50;
  float cnn_dropout = 0.3f;
  CnnDropoutPlacement cnn_dropout_placement = CnnDropoutPlacement::AfterFirstPool;

  int lstm_units = 32;
  int lstm_dense = 16;
  float lstm_dropout = 0.2f;

  int bilstm_units = 300;
  int bilstm_dense = 100;
  float bilstm_dropout = 0.2f;

  float transformer_head_dropout = 0.1f;
};

struct ModelSpec {
  Architecture architecture = Architecture::Cnn;
  LabelScheme scheme = LabelScheme::binary();
  ModelOptions options;
  EmbeddingMode embedding_mode = EmbeddingMode::Random;  // basic models only
  std::string checkpoint;                                // transformer only

  std::size_t num_classes() const { return scheme.size(); }
};

// Model-specific activations recorded by a training forward pass.
struct ForwardState {
  virtual ~ForwardState() = default;
};

/// A sequence classifier with a softmax head. forward() is const and keeps no
/// state, so a trained model may be shared by concurrent readers.
class ClassifierModel {
 public:
  virtual ~ClassifierModel() = default;

  virtual const ModelSpec& spec() const = 0;
  const LabelScheme& label_scheme() const { return spec().scheme; }
  std::size_t num_classes() const { return spec().num_classes(); }

  // Text front end: tokenization and indexing with the model's own vocabulary.
  virtual nn::IndexBatch encode_texts(std::span<const std::string> texts) const = 0;

  // B x num_classes probabilities.
  nn::Matrix forward(const nn::IndexBatch& batch) const;
  nn::Matrix forward_texts(std::span<const std::string> texts) const;

  // Training interface: logits with dropout active, and the matching backward
  // pass which accumulates parameter gradients from d(loss)/d(logits).
  virtual nn::Matrix train_logits(const nn::IndexBatch& batch, Rng& dropout_rng,
                                  std::unique_ptr<ForwardState>& state) const = 0;
  virtual void backward(const nn::Matrix& grad_logits, const ForwardState& state) = 0;

  virtual std::vector<nn::Param*> parameters() = 0;
  virtual std::unique_ptr<ClassifierModel> clone() const = 0;
  virtual void save(const std::filesystem::path& dir) const = 0;
  virtual std::string summary() const = 0;

  // Looks up a parameter by name; nullptr when absent.
  const nn::Param* find_parameter(std::string_view name) const;

 protected:
  virtual nn::Matrix inference_logits(const nn::IndexBatch& batch) const = 0;
  virtual void validate_batch(const nn::IndexBatch& batch) const = 0;
};

// Index of the largest entry of each row; ties go to the lowest index.
std::vector<std::size_t> argmax_rows(const nn::Matrix& probs);

// Embedding lookup -> body -> dense softmax head, over text_prep indices.
class SequenceClassifier final : public ClassifierModel {
 public:
  SequenceClassifier(ModelSpec spec, Vocabulary vocab, nn::Param embedding, nn::Sequential body);

  const ModelSpec& spec() const override { return spec_; }
  nn::IndexBatch encode_texts(std::span<const std::string> texts) const override;
  nn::Matrix train_logits(const nn::IndexBatch& batch, Rng& dropout_rng,
                          std::unique_ptr<ForwardState>& state) const override;
  void backward(const nn::Matrix& grad_logits, const ForwardState& state) override;
  std::vector<nn::Param*> parameters() override;
  std::unique_ptr<ClassifierModel> clone() const override;
  void save(const std::filesystem::path& dir) const override;
  std::string summary() const override;

  const Vocabulary& vocabulary() const { return vocab_; }
  const nn::Param& embedding() const { return embedding_; }
  const nn::Sequential& body() const { return body_; }

 protected:
  nn::Matrix inference_logits(const nn::IndexBatch& batch) const override;
  void validate_batch(const nn::IndexBatch& batch) const override;

 private:
  nn::Tensor lookup(const nn::IndexBatch& batch) const;

  ModelSpec spec_;
  Vocabulary vocab_;
  nn::Param embedding_;
  nn::Sequential body_;
};

// embedding -> conv1d(300, k=3, relu) -> max_pool(2) -> dropout(0.3)
//   -> conv1d(300, k=3, relu) -> max_pool(2) -> global_max_pool -> dense(50, relu)
//   -> dense(K, softmax)
std::unique_ptr<ClassifierModel> build_cnn(const EmbeddingMatrix& embedding,
                                           const LabelScheme& scheme,
                                           const ModelOptions& options = {});

// embedding -> lstm(32, sequences) -> global_max_pool -> dense(16, relu)
//   -> dropout(0.2) -> dense(K, softmax)
std::unique_ptr<ClassifierModel> build_lstm(const EmbeddingMatrix& embedding,
                                            const LabelScheme& scheme,
                                            const ModelOptions& options = {});

// embedding -> bilstm(300 per direction, sequences) -> global_max_pool
//   -> dense(100, relu) -> dropout(0.2) -> dense(K, softmax)
std::unique_ptr<ClassifierModel> build_bilstm(const EmbeddingMatrix& embedding,
                                              const LabelScheme& scheme,
                                              const ModelOptions& options = {});

std::unique_ptr<ClassifierModel> build_basic_model(Architecture architecture,
                                                   const EmbeddingMatrix& embedding,
                                                   const LabelScheme& scheme,
                                                   const ModelOptions& options = {});

// Shortest max_len for which the two conv/pool stages leave at least one step.
std::size_t cnn_min_length(const ModelOptions& options);

// Restores any model written by ClassifierModel::save.
std::unique_ptr<ClassifierModel> load_model(const std::filesystem::path& dir);

}  // namespace hateclf
