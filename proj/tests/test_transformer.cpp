#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "hateclf/error.hpp"
#include "hateclf/safetensors.hpp"
#include "hateclf/training.hpp"
#include "hateclf/transformer.hpp"
#include "json.hpp"
#include "support.hpp"

namespace hateclf {
namespace {

using json = nlohmann::json;
using testing::TempDir;

const std::filesystem::path kTiny = testing::data_path("tiny-bert");

json reference() {
  std::ifstream in(kTiny / "reference.json");
  return json::parse(in);
}

std::unique_ptr<TransformerClassifier> tiny_model(const LabelScheme& scheme,
                                                  std::size_t max_len = 12) {
  ModelOptions o;
  o.max_len = max_len;
  o.init_seed = 17;
  auto m = build_transformer_classifier(kTiny.string(), scheme, o);
  return std::unique_ptr<TransformerClassifier>(
      dynamic_cast<TransformerClassifier*>(m.release()));
}

TEST(BertConfigFile, ReadsCheckpointConfig) {
  BertConfig c = BertConfig::from_file(kTiny / "config.json");
  EXPECT_EQ(c.vocab_size, 100);
  EXPECT_EQ(c.hidden_size, 16);
  EXPECT_EQ(c.num_hidden_layers, 2);
  EXPECT_EQ(c.num_attention_heads, 4);
  EXPECT_EQ(c.intermediate_size, 32);
  EXPECT_EQ(c.max_position_embeddings, 40);
}

TEST(Tokenizer, MatchesReferenceIds) {
  auto tok = WordPieceTokenizer::from_directory(kTiny);
  const json ref = reference();
  const std::size_t max_len = ref["max_len"];
  for (const auto& c : ref["cases"]) {
    const std::string text = c["text"];
    EXPECT_EQ(tok.encode_for_classification(text, max_len), c["ids"].get<std::vector<int>>())
        << text;
  }
}

TEST(Encoder, MatchesReferenceActivations) {
  auto m = tiny_model(LabelScheme::binary());
  ASSERT_TRUE(m);
  const json ref = reference();
  for (const auto& c : ref["cases"]) {
    const std::string text = c["text"];
    std::vector<std::string> one{text};
    auto batch = m->encode_texts(one);
    ASSERT_EQ(batch.ids, c["ids"].get<std::vector<std::int32_t>>());
    const nn::Matrix seq = m->sequence_output(batch);
    const auto expected_seq = c["sequence_output"].get<std::vector<double>>();
    ASSERT_EQ(static_cast<std::size_t>(seq.size()), expected_seq.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < expected_seq.size(); ++i) {
      worst = std::max(worst, std::abs(seq.data()[i] - expected_seq[i]));
    }
    EXPECT_LT(worst, 1e-4) << text;
    const nn::Matrix pooled = m->pooled_output(batch);
    const auto expected_pool = c["pooled_output"].get<std::vector<double>>();
    ASSERT_EQ(static_cast<std::size_t>(pooled.size()), expected_pool.size());
    for (std::size_t i = 0; i < expected_pool.size(); ++i) {
      EXPECT_NEAR(pooled.data()[i], expected_pool[i], 1e-4) << text;
    }
  }
}

TEST(Encoder, PaddingDoesNotLeakIntoRealPositions) {
  auto short_model = tiny_model(LabelScheme::binary(), 8);
  auto long_model = tiny_model(LabelScheme::binary(), 20);
  std::vector<std::string> t{"you are not good"};
  const nn::Matrix a = short_model->pooled_output(short_model->encode_texts(t));
  const nn::Matrix b = long_model->pooled_output(long_model->encode_texts(t));
  EXPECT_TRUE(a.isApprox(b, 1e-5f));
}

TEST(Checkpoint, PrefixedNamesLoad) {
  TempDir tmp;
  for (const char* f : {"config.json", "vocab.txt", "tokenizer_config.json"}) {
    std::filesystem::copy_file(kTiny / f, tmp / f);
  }
  auto tensors = read_safetensors(kTiny / "model.safetensors");
  std::map<std::string, StoredTensor> prefixed;
  for (auto& [k, v] : tensors) prefixed["bert." + k] = v;
  write_safetensors(tmp / "model.safetensors", prefixed);

  auto a = tiny_model(LabelScheme::fine());
  ModelOptions o;
  o.max_len = 12;
  o.init_seed = 17;
  auto b = build_transformer_classifier(tmp.path().string(), LabelScheme::fine(), o);
  std::vector<std::string> t{"the quick brown fox", "हम तुम"};
  EXPECT_EQ(a->forward_texts(t), b->forward_texts(t));
}

TEST(Checkpoint, MissingTensorIsLoadError) {
  TempDir tmp;
  for (const char* f : {"config.json", "vocab.txt", "tokenizer_config.json"}) {
    std::filesystem::copy_file(kTiny / f, tmp / f);
  }
  auto tensors = read_safetensors(kTiny / "model.safetensors");
  tensors.erase(tensors.begin());
  write_safetensors(tmp / "model.safetensors", tensors);
  try {
    build_transformer_classifier(tmp.path().string(), LabelScheme::binary());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Load);
  }
}

TEST(Checkpoint, UnknownIdIsLoadError) {
  TempDir tmp;
  setenv("HF_HUB_CACHE", tmp.path().c_str(), 1);
  try {
    resolve_checkpoint("nobody/no-such-model");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Load);
  }
  unsetenv("HF_HUB_CACHE");
}

TEST(Checkpoint, ResolvesHubCacheLayout) {
  TempDir tmp;
  const auto snap = tmp / "models--org--tiny" / "snapshots" / "abc123";
  std::filesystem::create_directories(snap);
  std::filesystem::create_directories(tmp / "models--org--tiny" / "refs");
  testing::write_text(tmp / "models--org--tiny" / "refs" / "main", "abc123\n");
  for (const char* f : {"config.json", "vocab.txt", "model.safetensors"}) {
    std::filesystem::copy_file(kTiny / f, snap / f);
  }
  setenv("HF_HUB_CACHE", tmp.path().c_str(), 1);
  EXPECT_EQ(std::filesystem::canonical(resolve_checkpoint("org/tiny")),
            std::filesystem::canonical(snap));
  unsetenv("HF_HUB_CACHE");
}

TEST(Classifier, MaxLenBeyondPositionsRejected) {
  ModelOptions o;
  o.max_len = 41;
  EXPECT_THROW(build_transformer_classifier(kTiny.string(), LabelScheme::binary(), o), Error);
}

TEST(Classifier, SaveLoadRoundTrip) {
  auto m = tiny_model(LabelScheme::fine());
  TempDir tmp;
  m->save(tmp / "m");
  auto back = load_model(tmp / "m");
  EXPECT_EQ(back->spec().architecture, Architecture::Transformer);
  std::vector<std::string> t{"you are not good", "", "Café résumé #hate @user"};
  EXPECT_EQ(m->forward_texts(t), back->forward_texts(t));
}

// Analytic gradients against double-precision autograd of the same network
// with dropout disabled and a fixed classification head.
TEST(Classifier, GradientsMatchAutogradReference) {
  TempDir tmp;
  for (const char* f : {"vocab.txt", "tokenizer_config.json", "model.safetensors"}) {
    std::filesystem::copy_file(kTiny / f, tmp / f);
  }
  json cfg;
  {
    std::ifstream in(kTiny / "config.json");
    cfg = json::parse(in);
  }
  cfg["hidden_dropout_prob"] = 0.0;
  cfg["attention_probs_dropout_prob"] = 0.0;
  testing::write_text(tmp / "config.json", cfg.dump());

  const json ref = reference()["gradient_case"];
  ModelOptions o;
  o.max_len = ref["max_len"];
  o.transformer_head_dropout = 0.0f;
  auto m = build_transformer_classifier(tmp.path().string(), LabelScheme::fine(), o);

  const auto w = ref["classifier_weight"].get<std::vector<float>>();  // K x h
  const auto bias = ref["classifier_bias"].get<std::vector<float>>();
  for (auto* p : m->parameters()) {
    if (p->name == "classifier.kernel") {
      for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
        for (Eigen::Index k = 0; k < p->value.cols(); ++k) {
          p->value(i, k) = w[static_cast<std::size_t>(k * p->value.rows() + i)];
        }
      }
    } else if (p->name == "classifier.bias") {
      for (Eigen::Index k = 0; k < p->value.cols(); ++k) p->value(0, k) = bias[k];
    }
    p->zero_grad();
  }

  const auto texts = ref["texts"].get<std::vector<std::string>>();
  const auto y = ref["targets"].get<std::vector<std::size_t>>();
  const auto batch = m->encode_texts(texts);
  Rng rng(5);
  std::unique_ptr<ForwardState> st;
  nn::Matrix g;
  const double loss = softmax_cross_entropy(m->train_logits(batch, rng, st), y, &g);
  EXPECT_NEAR(loss, ref["loss"].get<double>(), 1e-5);
  m->backward(g, *st);

  // Reference name -> (our name, stored transposed).
  auto ours = [](const std::string& hf) -> std::pair<std::string, bool> {
    if (hf == "embeddings.word_embeddings.weight") return {"embeddings.word", false};
    if (hf == "embeddings.position_embeddings.weight") return {"embeddings.position", false};
    if (hf == "embeddings.LayerNorm.weight") return {"embeddings.norm.gamma", false};
    if (hf == "pooler.dense.weight") return {"pooler.kernel", true};
    const std::string l = "encoder.layer" + hf.substr(14, 1) + ".";
    const std::string rest = hf.substr(16);
    const bool weight = rest.ends_with(".weight");
    const std::string suffix = weight ? "kernel" : "bias";
    if (rest.starts_with("attention.self.query")) return {l + "query." + suffix, weight};
    if (rest.starts_with("attention.self.key")) return {l + "key." + suffix, weight};
    if (rest.starts_with("attention.self.value")) return {l + "value." + suffix, weight};
    if (rest.starts_with("attention.output.dense")) return {l + "attention_output." + suffix, weight};
    if (rest.starts_with("intermediate.dense")) return {l + "intermediate." + suffix, weight};
    if (rest == "output.LayerNorm.bias") return {l + "output_norm.beta", false};
    return {"?", false};
  };

  for (const auto& [hf, values] : ref["grads"].items()) {
    const auto [name, transposed] = ours(hf);
    const nn::Param* p = m->find_parameter(name);
    ASSERT_NE(p, nullptr) << hf;
    const auto expected = values.get<std::vector<double>>();
    ASSERT_EQ(static_cast<std::size_t>(p->grad.size()), expected.size()) << hf;
    nn::Matrix got = transposed ? nn::Matrix(p->grad.transpose()) : p->grad;
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const double d = got.data()[i] - expected[i];
      diff2 += d * d;
      norm2 += expected[i] * expected[i];
    }
    if (norm2 < 1e-20) {
      // Key biases shift every score of a row equally; softmax ignores them.
      EXPECT_LT(std::sqrt(diff2), 1e-6) << hf;
    } else {
      EXPECT_LT(std::sqrt(diff2 / norm2), 1e-3) << hf;
    }
  }
}

TEST(Classifier, ShortFineTuneFitsSmallSet) {
  auto m = tiny_model(LabelScheme::binary(), 10);
  std::vector<LabeledExample> ex;
  const char* hof[] = {"you are not good", "unable to play", "not good", "you are unable"};
  const char* nt[] = {"the quick brown fox", "quick fox", "brown fox", "the fox"};
  for (int i = 0; i < 4; ++i) {
    ex.push_back({"h" + std::to_string(i), hof[i], "HOF", std::nullopt});
    ex.push_back({"n" + std::to_string(i), nt[i], "NOT", std::nullopt});
  }
  Dataset d("train", LabelScheme::binary(), ex);
  TrainConfig cfg = TrainConfig::defaults_for(Architecture::Transformer);
  cfg.learning_rate = 1e-3;
  cfg.max_epochs = 30;
  cfg.batch_size = 4;
  cfg.seed = 3;
  auto r = train(*m, d, d, cfg);
  EXPECT_EQ(r.history.size(), 30u);
  EXPECT_DOUBLE_EQ(accuracy(*r.best_model, d), 1.0);
}

}  // namespace
}  // namespace hateclf
