#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hateclf/error.hpp"
#include "hateclf/models.hpp"
#include "hateclf/text.hpp"
#include "hateclf/training.hpp"
#include "support.hpp"

namespace hateclf {
namespace {

using testing::TempDir;

ModelOptions small_options() {
  ModelOptions o;
  o.max_len = 12;
  o.init_seed = 11;
  o.cnn_filters = 8;
  o.cnn_dense = 6;
  o.lstm_units = 5;
  o.lstm_dense = 4;
  o.bilstm_units = 5;
  o.bilstm_dense = 4;
  return o;
}

EmbeddingMatrix small_embedding(const Dataset& d, std::size_t dim = 8,
                                EmbeddingMode mode = EmbeddingMode::Random) {
  const Vocabulary vocab = build_vocabulary(d);
  if (mode == EmbeddingMode::Random) return build_embedding_matrix(vocab, nullptr, mode, 5, dim);
  WordVectors wv;
  wv.dim = dim;
  for (std::size_t i = 2; i < vocab.size(); i += 2) {
    std::vector<float> v(dim);
    for (std::size_t k = 0; k < dim; ++k) v[k] = 0.01f * static_cast<float>((i + k) % 7);
    wv.vectors[vocab.token(static_cast<std::int32_t>(i))] = v;
  }
  return build_embedding_matrix(vocab, &wv, mode, 5, dim);
}

const Architecture kBasic[] = {Architecture::Cnn, Architecture::Lstm, Architecture::BiLstm};

TEST(ModelNames, RoundTrip) {
  for (auto a : {Architecture::Cnn, Architecture::Lstm, Architecture::BiLstm,
                 Architecture::Transformer}) {
    EXPECT_EQ(architecture_from_string(to_string(a)), a);
  }
  EXPECT_THROW(architecture_from_string("gru"), Error);
}

TEST(CnnLength, MinimumMatchesBruteForce) {
  ModelOptions o;
  // Oracle: simulate valid conv (k-1 lost) and floor pooling.
  auto survives = [&](int len) {
    int s = len;
    for (int stage = 0; stage < 2; ++stage) {
      s -= o.cnn_kernel - 1;
      if (s < 1) return false;
      s /= o.cnn_pool;
      if (s < 1) return false;
    }
    return true;
  };
  int expected = 1;
  while (!survives(expected)) ++expected;
  EXPECT_EQ(cnn_min_length(o), static_cast<std::size_t>(expected));
  EXPECT_EQ(cnn_min_length(o), 10u);
}

TEST(CnnLength, ShortMaxLenRejected) {
  auto d = testing::keyword_corpus(20, 1, SchemeKind::Binary);
  auto e = small_embedding(d);
  ModelOptions o = small_options();
  o.max_len = cnn_min_length(o) - 1;
  try {
    build_cnn(e, d.scheme(), o);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::Config);
  }
  o.max_len = cnn_min_length(o);
  EXPECT_NO_THROW(build_cnn(e, d.scheme(), o));
}

TEST(ModelShapes, DefaultLayerWidths) {
  auto d = testing::keyword_corpus(30, 2, SchemeKind::Fine);
  auto e = build_embedding_matrix(build_vocabulary(d), nullptr, EmbeddingMode::Random, 1);
  ASSERT_EQ(e.dim(), 300u);

  auto cnn = build_cnn(e, d.scheme());
  EXPECT_EQ(cnn->find_parameter("conv1.kernel")->shape, (std::vector<int>{3, 300, 300}));
  EXPECT_EQ(cnn->find_parameter("conv2.kernel")->shape, (std::vector<int>{3, 300, 300}));
  EXPECT_EQ(cnn->find_parameter("dense1.kernel")->shape, (std::vector<int>{300, 50}));
  EXPECT_EQ(cnn->find_parameter("output.kernel")->shape, (std::vector<int>{50, 4}));

  auto lstm = build_lstm(e, d.scheme());
  EXPECT_EQ(lstm->find_parameter("lstm.kernel")->shape, (std::vector<int>{300, 128}));
  EXPECT_EQ(lstm->find_parameter("lstm.recurrent_kernel")->shape, (std::vector<int>{32, 128}));
  EXPECT_EQ(lstm->find_parameter("dense1.kernel")->shape, (std::vector<int>{32, 16}));
  EXPECT_EQ(lstm->find_parameter("output.kernel")->shape, (std::vector<int>{16, 4}));

  auto bi = build_bilstm(e, d.scheme());
  EXPECT_EQ(bi->find_parameter("bilstm.forward.kernel")->shape, (std::vector<int>{300, 1200}));
  EXPECT_EQ(bi->find_parameter("bilstm.backward.kernel")->shape, (std::vector<int>{300, 1200}));
  EXPECT_EQ(bi->find_parameter("dense1.kernel")->shape, (std::vector<int>{600, 100}));
  EXPECT_EQ(bi->find_parameter("output.kernel")->shape, (std::vector<int>{100, 4}));

  EXPECT_EQ(cnn->find_parameter("nope"), nullptr);
  EXPECT_NE(cnn->summary().find("cnn"), std::string::npos);
}

TEST(ModelForward, ProbabilitiesAreDistributions) {
  auto d = testing::keyword_corpus(9, 3, SchemeKind::Fine);
  auto e = small_embedding(d);
  for (auto a : kBasic) {
    auto m = build_basic_model(a, e, d.scheme(), small_options());
    auto texts = d.texts();
    nn::Matrix p = m->forward_texts(texts);
    ASSERT_EQ(p.rows(), 9);
    ASSERT_EQ(p.cols(), 4);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      EXPECT_NEAR(p.row(r).sum(), 1.0f, 1e-5f);
      EXPECT_GE(p.row(r).minCoeff(), 0.0f);
    }
  }
}

TEST(ModelForward, BatchPermutationEquivariant) {
  auto d = testing::keyword_corpus(10, 4, SchemeKind::Binary);
  auto e = small_embedding(d);
  Rng rng(99);
  for (auto a : kBasic) {
    auto m = build_basic_model(a, e, d.scheme(), small_options());
    auto texts = d.texts();
    nn::Matrix p = m->forward_texts(texts);
    std::vector<std::size_t> perm(texts.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<std::string> shuffled;
    for (auto i : perm) shuffled.push_back(texts[i]);
    nn::Matrix q = m->forward_texts(shuffled);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        EXPECT_NEAR(q(static_cast<Eigen::Index>(i), c), p(static_cast<Eigen::Index>(perm[i]), c),
                    1e-6f);
      }
    }
    // Single-example batches agree with the full batch.
    std::vector<std::string> one{texts[3]};
    nn::Matrix s = m->forward_texts(one);
    EXPECT_TRUE(s.row(0).isApprox(p.row(3), 1e-5f));
  }
}

TEST(ModelForward, RejectsBadBatches) {
  auto d = testing::keyword_corpus(4, 4, SchemeKind::Binary);
  auto e = small_embedding(d);
  auto m = build_lstm(e, d.scheme(), small_options());
  nn::IndexBatch b;
  b.batch = 1;
  b.steps = 5;
  b.ids.assign(5, 0);
  EXPECT_THROW(m->forward(b), Error);
  b.steps = 12;
  b.ids.assign(12, static_cast<std::int32_t>(e.vocab.size()));
  EXPECT_THROW(m->forward(b), Error);
}

TEST(ModelForward, ArgmaxTiesGoLow) {
  nn::Matrix p(3, 3);
  p << 0.2f, 0.4f, 0.4f,  //
      0.5f, 0.5f, 0.0f,   //
      0.1f, 0.2f, 0.7f;
  EXPECT_EQ(argmax_rows(p), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(ModelPersistence, SaveLoadRoundTrip) {
  auto d = testing::keyword_corpus(12, 5, SchemeKind::Fine);
  auto e = small_embedding(d);
  TempDir tmp;
  for (auto a : kBasic) {
    auto m = build_basic_model(a, e, d.scheme(), small_options());
    const auto dir = tmp / std::string(to_string(a));
    m->save(dir);
    auto back = load_model(dir);
    EXPECT_EQ(back->spec().architecture, a);
    EXPECT_EQ(back->label_scheme(), d.scheme());
    EXPECT_EQ(back->spec().options.max_len, 12u);
    auto texts = d.texts();
    EXPECT_EQ(m->forward_texts(texts), back->forward_texts(texts));
    EXPECT_EQ(m->summary(), back->summary());
  }
  EXPECT_THROW(load_model(tmp / "missing"), Error);
}

TEST(ModelEmbedding, FrozenRowsStayFixedAndPadGetsNoGradient) {
  auto d = testing::keyword_corpus(8, 6, SchemeKind::Binary);
  for (auto mode : {EmbeddingMode::FrozenPretrained, EmbeddingMode::TrainablePretrained}) {
    auto e = small_embedding(d, 8, mode);
    auto m = build_lstm(e, d.scheme(), small_options());
    auto texts = d.texts();
    auto batch = m->encode_texts(texts);
    Rng rng(1);
    std::unique_ptr<ForwardState> st;
    nn::Matrix logits = m->train_logits(batch, rng, st);
    nn::Matrix g = nn::Matrix::Ones(logits.rows(), logits.cols());
    for (auto* p : m->parameters()) p->zero_grad();
    m->backward(g, *st);
    const nn::Param* emb = m->find_parameter("embedding");
    ASSERT_NE(emb, nullptr);
    EXPECT_EQ(emb->trainable, mode != EmbeddingMode::FrozenPretrained);
    EXPECT_EQ(emb->grad.row(Vocabulary::kPad).squaredNorm(), 0.0f);
    if (mode == EmbeddingMode::FrozenPretrained) {
      EXPECT_EQ(emb->grad.squaredNorm(), 0.0f);
    } else {
      EXPECT_GT(emb->grad.squaredNorm(), 0.0f);
    }
  }

  // A short training run leaves frozen rows untouched.
  auto e = small_embedding(d, 8, EmbeddingMode::FrozenPretrained);
  auto m = build_cnn(e, d.scheme(), small_options());
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.batch_size = 4;
  train(*m, d, d, cfg);
  EXPECT_EQ(m->find_parameter("embedding")->value, e.values);
  EXPECT_NE(m->find_parameter("conv1.kernel")->value,
            build_cnn(e, d.scheme(), small_options())->find_parameter("conv1.kernel")->value);
}

// Finite differences on the softmax head against the analytic gradient.
TEST(ModelGradient, HeadMatchesFiniteDifferences) {
  auto d = testing::keyword_corpus(4, 7, SchemeKind::Binary);
  auto e = small_embedding(d, 8);
  for (auto a : kBasic) {
    auto m = build_basic_model(a, e, d.scheme(), small_options());
    auto texts = d.texts();
    auto batch = m->encode_texts(texts);
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < d.size(); ++i) y.push_back(d.label_index(i));

    auto loss_at = [&](nn::Matrix* grad_logits, std::unique_ptr<ForwardState>* keep) {
      Rng rng(3);
      std::unique_ptr<ForwardState> st;
      nn::Matrix logits = m->train_logits(batch, rng, st);
      const double l = softmax_cross_entropy(logits, y, grad_logits);
      if (keep) *keep = std::move(st);
      return l;
    };

    for (auto* p : m->parameters()) p->zero_grad();
    nn::Matrix g;
    std::unique_ptr<ForwardState> st;
    loss_at(&g, &st);
    m->backward(g, *st);

    double diff2 = 0.0, norm2 = 0.0;
    for (auto* p : m->parameters()) {
      if (p->name != "output.kernel" && p->name != "output.bias") continue;
      for (Eigen::Index i = 0; i < p->value.size(); ++i) {
        const float orig = p->value.data()[i];
        const float h = 2e-2f;
        p->value.data()[i] = orig + h;
        const double up = loss_at(nullptr, nullptr);
        p->value.data()[i] = orig - h;
        const double down = loss_at(nullptr, nullptr);
        p->value.data()[i] = orig;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = p->grad.data()[i];
        diff2 += (numeric - analytic) * (numeric - analytic);
        norm2 += std::max(numeric * numeric, analytic * analytic);
      }
    }
    ASSERT_GT(norm2, 0.0);
    EXPECT_LT(std::sqrt(diff2 / norm2), 1e-3) << to_string(a);
  }
}

}  // namespace
}  // namespace hateclf
