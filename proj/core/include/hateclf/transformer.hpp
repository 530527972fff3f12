#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hateclf/models.hpp"
#include "hateclf/nn/layers.hpp"
#include "hateclf/wordpiece.hpp"

namespace hateclf {

/// Encoder hyperparameters as found in a BERT checkpoint's config.json.
struct BertConfig {
  int vocab_size = 0;
  int hidden_size = 768;
  int num_hidden_layers = 12;
  int num_attention_heads = 12;
  int intermediate_size = 3072;
  int max_position_embeddings = 512;
  int type_vocab_size = 2;
  float layer_norm_eps = 1e-12f;
  float hidden_dropout_prob = 0.1f;
  float attention_probs_dropout_prob = 0.1f;
  float initializer_range = 0.02f;
  std::string hidden_act = "gelu";

  static BertConfig from_file(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Resolves a checkpoint id to a local directory: an existing directory is used
// as is; an "org/name" id is looked up in the local Hugging Face hub cache
// ($HF_HUB_CACHE, $HF_HOME/hub or ~/.cache/huggingface/hub). No network access.
std::filesystem::path resolve_checkpoint(const std::string& checkpoint_id);

/// Pretrained BERT encoder with a freshly initialised pooler-fed softmax head.
/// Inputs are [CLS] wordpieces [SEP] [PAD]... produced by the checkpoint's own
/// tokenizer; [PAD] key positions are masked out of attention.
class TransformerClassifier final : public ClassifierModel {
 public:
  TransformerClassifier(ModelSpec spec, BertConfig config, WordPieceTokenizer tokenizer);

  const ModelSpec& spec() const override { return spec_; }
  nn::IndexBatch encode_texts(std::span<const std::string> texts) const override;
  nn::Matrix train_logits(const nn::IndexBatch& batch, Rng& dropout_rng,
                          std::unique_ptr<ForwardState>& state) const override;
  void backward(const nn::Matrix& grad_logits, const ForwardState& state) override;
  std::vector<nn::Param*> parameters() override;
  std::unique_ptr<ClassifierModel> clone() const override;
  void save(const std::filesystem::path& dir) const override;
  std::string summary() const override;

  // Final hidden states, (B*T) x hidden, inference mode.
  nn::Matrix sequence_output(const nn::IndexBatch& batch) const;
  // tanh-pooled [CLS] representation, B x hidden, inference mode.
  nn::Matrix pooled_output(const nn::IndexBatch& batch) const;

  const BertConfig& config() const { return config_; }
  const WordPieceTokenizer& tokenizer() const { return tokenizer_; }

  // Copies encoder (and pooler, when present) weights from checkpoint tensors.
  void load_pretrained(const std::filesystem::path& checkpoint_dir);
  // All parameters except the classification head.
  std::vector<nn::Param*> encoder_parameters();

 protected:
  nn::Matrix inference_logits(const nn::IndexBatch& batch) const override;
  void validate_batch(const nn::IndexBatch& batch) const override;

 private:
  struct Block {
    nn::Dense query;
    nn::Dense key;
    nn::Dense value;
    nn::Dense attention_output;
    nn::LayerNorm attention_norm;
    nn::Dense intermediate;
    nn::Gelu activation;
    nn::Dense output;
    nn::LayerNorm output_norm;
  };
  struct State;

  nn::Matrix run(const nn::IndexBatch& batch, const nn::ForwardContext& ctx, State* state,
                 bool stop_at_sequence, bool stop_at_pool) const;

  ModelSpec spec_;
  BertConfig config_;
  WordPieceTokenizer tokenizer_;
  nn::Param word_;
  nn::Param position_;
  nn::Param token_type_;
  nn::LayerNorm embedding_norm_;
  std::vector<Block> blocks_;
  nn::Dense pooler_;
  nn::Dense classifier_;
};

// Loads the checkpoint's config, tokenizer and encoder weights and attaches a
// new classification head of width scheme.size().
std::unique_ptr<ClassifierModel> build_transformer_classifier(const std::string& checkpoint_id,
                                                              const LabelScheme& scheme,
                                                              const ModelOptions& options = {});

// Restores a fine-tuned model written by TransformerClassifier::save.
std::unique_ptr<ClassifierModel> load_transformer_classifier(const std::filesystem::path& dir);

}  // namespace hateclf
