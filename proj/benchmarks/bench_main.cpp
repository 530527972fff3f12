#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hateclf/embeddings.hpp"
#include "hateclf/eval.hpp"
#include "hateclf/models.hpp"
#include "hateclf/text.hpp"
#include "hateclf/training.hpp"

using namespace hateclf;

namespace {

std::vector<std::string> sample_texts(std::size_t n) {
  Rng rng(1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (int k = 0; k < 20; ++k) s += "w" + std::to_string(rng.uniform_index(500)) + " ";
    out.push_back(s);
  }
  return out;
}

std::unique_ptr<ClassifierModel> make_model(Architecture a) {
  std::vector<std::vector<std::string>> lists;
  for (const auto& t : sample_texts(200)) lists.push_back(tokenize(t));
  const auto emb = build_embedding_matrix(build_vocabulary(lists), nullptr, EmbeddingMode::Random, 1);
  return build_basic_model(a, emb, LabelScheme::binary());
}

void BM_Forward(benchmark::State& state, Architecture a) {
  const auto model = make_model(a);
  const auto texts = sample_texts(32);
  const auto batch = model->encode_texts(texts);
  for (auto _ : state) benchmark::DoNotOptimize(model->forward(batch));
  state.SetItemsProcessed(state.iterations() * 32);
}

void BM_TrainStep(benchmark::State& state, Architecture a) {
  auto model = make_model(a);
  const auto texts = sample_texts(32);
  const auto batch = model->encode_texts(texts);
  std::vector<std::size_t> y(32);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2;
  Rng rng(2);
  for (auto _ : state) {
    std::unique_ptr<ForwardState> st;
    const auto logits = model->train_logits(batch, rng, st);
    nn::Matrix grad;
    softmax_cross_entropy(logits, y, &grad);
    model->backward(grad, *st);
  }
  state.SetItemsProcessed(state.iterations() * 32);
}

void BM_Tokenize(benchmark::State& state) {
  const auto texts = sample_texts(256);
  for (auto _ : state) {
    for (const auto& t : texts) benchmark::DoNotOptimize(tokenize(t));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}

void BM_Metrics(benchmark::State& state) {
  const auto scheme = LabelScheme::fine();
  Rng rng(3);
  std::vector<std::string> t(static_cast<std::size_t>(state.range(0)));
  std::vector<std::string> p(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = scheme.label(rng.uniform_index(4));
    p[i] = scheme.label(rng.uniform_index(4));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(t, p, scheme));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Forward, cnn, Architecture::Cnn)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, lstm, Architecture::Lstm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, bilstm, Architecture::BiLstm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, cnn, Architecture::Cnn)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, lstm, Architecture::Lstm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, bilstm, Architecture::BiLstm)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Tokenize);
BENCHMARK(BM_Metrics)->Arg(1000)->Arg(100000);
BENCHMARK_MAIN();
