#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "hateclf/error.hpp"
#include "hateclf/nn/adam.hpp"
#include "hateclf/nn/layers.hpp"
#include "hateclf/nn/lstm.hpp"
#include "hateclf/nn/param_io.hpp"
#include "support.hpp"

using namespace hateclf;
using namespace hateclf::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, float scale = 1.0f) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.normal() * scale);
  return m;
}

bool close(double analytic, double numeric, double rel, double abs_tol) {
  return std::abs(analytic - numeric) <= rel * std::max(std::abs(analytic), std::abs(numeric)) + abs_tol;
}

// Checks input and parameter gradients of `layer` against central differences
// of L = sum(w .* layer(x)). Training-phase layers reuse one dropout seed per
// evaluation so every call sees the same mask.
void gradient_check(Layer& layer, const Tensor& x, Phase phase = Phase::Inference,
                    double rel = 2e-2, double abs_tol = 2e-3) {
  Rng wrng(1234);
  auto run = [&](std::unique_ptr<LayerCache>* cache) {
    Rng drop(99);
    ForwardContext ctx{phase, &drop};
    return layer.forward(x, ctx, cache);
  };
  std::unique_ptr<LayerCache> cache;
  const Tensor y = run(&cache);
  const Matrix w = random_matrix(y.data.rows(), y.data.cols(), wrng);
  auto loss = [&](const Tensor& out) { return static_cast<double>((out.data.cast<double>().array() * w.cast<double>().array()).sum()); };

  std::vector<Param*> params;
  layer.collect_params(params);
  for (auto* p : params) p->zero_grad();
  const Tensor dx = layer.backward(Tensor{y.batch, y.steps, w}, *cache);

  const float h = 1e-2f;
  Tensor xp = x;
  for (Eigen::Index i = 0; i < x.data.size(); ++i) {
    const float orig = xp.data.data()[i];
    xp.data.data()[i] = orig + h;
    Rng d1(99);
    const double lp = loss(layer.forward(xp, ForwardContext{phase, &d1}, nullptr));
    xp.data.data()[i] = orig - h;
    Rng d2(99);
    const double lm = loss(layer.forward(xp, ForwardContext{phase, &d2}, nullptr));
    xp.data.data()[i] = orig;
    const double num = (lp - lm) / (2.0 * h);
    EXPECT_TRUE(close(dx.data.data()[i], num, rel, abs_tol))
        << layer.describe() << " input " << i << ": " << dx.data.data()[i] << " vs " << num;
  }
  for (auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const float orig = p->value.data()[i];
      p->value.data()[i] = orig + h;
      const double lp = loss(run(nullptr));
      p->value.data()[i] = orig - h;
      const double lm = loss(run(nullptr));
      p->value.data()[i] = orig;
      const double num = (lp - lm) / (2.0 * h);
      EXPECT_TRUE(close(p->grad.data()[i], num, rel, abs_tol))
          << p->name << "[" << i << "]: " << p->grad.data()[i] << " vs " << num;
    }
  }
}

Tensor random_tensor(int b, int t, int c, std::uint64_t seed) {
  Rng rng(seed);
  return Tensor{b, t, random_matrix(static_cast<Eigen::Index>(b) * t, c, rng)};
}

}  // namespace

TEST(Dense, ForwardMatchesHandComputation) {
  Rng rng(1);
  Dense d("d", 2, 2, rng);
  d.kernel().value << 1, 2, 3, 4;
  d.bias().value << 0.5f, -0.5f;
  Tensor x{1, 1, Matrix(1, 2)};
  x.data << 1, 1;
  const Tensor y = d.forward(x, {}, nullptr);
  EXPECT_FLOAT_EQ(y.data(0, 0), 4.5f);
  EXPECT_FLOAT_EQ(y.data(0, 1), 5.5f);
}

TEST(GradientCheck, Dense) {
  Rng rng(2);
  Dense d("d", 4, 3, rng);
  gradient_check(d, random_tensor(2, 3, 4, 3));
}

TEST(GradientCheck, Conv1D) {
  Rng rng(3);
  Conv1D c("c", 3, 4, 3, rng);
  gradient_check(c, random_tensor(2, 6, 3, 4));
}

TEST(Conv1D, ValidPaddingShape) {
  Rng rng(4);
  Conv1D c("c", 5, 7, 3, rng);
  const Tensor y = c.forward(random_tensor(2, 10, 5, 1), {}, nullptr);
  EXPECT_EQ(y.steps, 8);
  EXPECT_EQ(y.channels(), 7);
  EXPECT_EQ(y.data.rows(), 16);
}

TEST(Conv1D, MatchesDirectConvolution) {
  Rng rng(5);
  Conv1D c("c", 2, 3, 2, rng);
  const Tensor x = random_tensor(1, 4, 2, 6);
  const Tensor y = c.forward(x, {}, nullptr);
  std::vector<Param*> ps;
  c.collect_params(ps);
  const Matrix& k = ps[0]->value;  // (kernel * in) x out
  const Matrix& b = ps[1]->value;
  for (int t = 0; t < 3; ++t) {
    for (int o = 0; o < 3; ++o) {
      double s = b(0, o);
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) s += x.data(t + j, i) * k(j * 2 + i, o);
      }
      EXPECT_NEAR(y.data(t, o), s, 1e-5);
    }
  }
}

TEST(GradientCheck, MaxPoolAndGlobalMaxPool) {
  MaxPool1D p(2);
  gradient_check(p, random_tensor(2, 7, 3, 5));
  GlobalMaxPool1D g;
  gradient_check(g, random_tensor(3, 5, 2, 6));
}

TEST(MaxPool1D, DropsRemainder) {
  MaxPool1D p(2);
  Tensor x{1, 5, Matrix(5, 1)};
  x.data << 1, 3, 2, 0, 9;
  const Tensor y = p.forward(x, {}, nullptr);
  ASSERT_EQ(y.steps, 2);
  EXPECT_EQ(y.data(0, 0), 3);
  EXPECT_EQ(y.data(1, 0), 2);
}

TEST(GradientCheck, Activations) {
  Relu r;
  Tensor away = random_tensor(2, 2, 5, 7);
  away.data = away.data.unaryExpr([](float v) { return v + (v < 0 ? -0.1f : 0.1f); });
  gradient_check(r, away);
  Tanh t;
  gradient_check(t, random_tensor(2, 2, 5, 8));
  Gelu g(GeluForm::Erf);
  gradient_check(g, random_tensor(2, 2, 5, 9));
  Gelu gt(GeluForm::Tanh);
  gradient_check(gt, random_tensor(2, 2, 5, 10));
}

TEST(GradientCheck, LayerNorm) {
  LayerNorm n("n", 6, 1e-5f);
  Rng rng(11);
  n.gamma().value = random_matrix(1, 6, rng);
  n.beta().value = random_matrix(1, 6, rng);
  gradient_check(n, random_tensor(2, 2, 6, 12));
}

TEST(GradientCheck, DropoutTrainingMask) {
  Dropout d(0.4f);
  gradient_check(d, random_tensor(3, 2, 4, 13), Phase::Training);
}

TEST(Dropout, InferenceIsIdentityAndTrainingScales) {
  Dropout d(0.5f);
  const Tensor x = random_tensor(4, 5, 10, 14);
  EXPECT_EQ(d.forward(x, {}, nullptr).data, x.data);
  Rng rng(1);
  const Tensor y = d.forward(x, ForwardContext{Phase::Training, &rng}, nullptr);
  int zeros = 0;
  for (Eigen::Index i = 0; i < y.data.size(); ++i) {
    if (y.data.data()[i] == 0.0f) {
      ++zeros;
    } else {
      EXPECT_FLOAT_EQ(y.data.data()[i], 2.0f * x.data.data()[i]);
    }
  }
  EXPECT_GT(zeros, 50);
  EXPECT_LT(zeros, 150);
}

TEST(GradientCheck, Lstm) {
  Rng rng(15);
  Lstm l("l", 3, 4, false, rng);
  gradient_check(l, random_tensor(2, 4, 3, 16));
  Lstm r("r", 3, 4, true, rng);
  gradient_check(r, random_tensor(2, 4, 3, 17));
}

TEST(GradientCheck, Bidirectional) {
  Rng rng(18);
  Bidirectional b("b", 3, 3, rng);
  gradient_check(b, random_tensor(2, 3, 3, 19));
}

TEST(Lstm, ReverseOutputsAlignWithPositions) {
  Rng rng(20);
  Lstm fwd("l", 2, 3, false, rng);
  Rng rng2(20);
  Lstm rev("l", 2, 3, true, rng2);
  // Reversing the input of the forward LSTM equals the reverse LSTM with its
  // outputs flipped back.
  const Tensor x = random_tensor(1, 5, 2, 21);
  Tensor flipped = x;
  for (int t = 0; t < 5; ++t) flipped.data.row(t) = x.data.row(4 - t);
  const Tensor a = fwd.forward(flipped, {}, nullptr);
  const Tensor b = rev.forward(x, {}, nullptr);
  for (int t = 0; t < 5; ++t) {
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(a.data(4 - t, c), b.data(t, c), 1e-6);
  }
}

TEST(Initializers, OrthogonalAndForgetBias) {
  Rng rng(22);
  Lstm l("l", 5, 6, false, rng);
  const Matrix& r = l.recurrent_kernel().value;  // 6 x 24
  const Matrix gram = r * r.transpose();
  EXPECT_TRUE(gram.isApprox(Matrix::Identity(6, 6), 1e-4f));
  std::vector<Param*> ps;
  l.collect_params(ps);
  const Matrix& bias = ps[2]->value;
  for (int j = 0; j < 24; ++j) EXPECT_EQ(bias(0, j), (j >= 6 && j < 12) ? 1.0f : 0.0f);
}

TEST(Initializers, GlorotUniformBounds) {
  Rng rng(23);
  Matrix m(50, 30);
  glorot_uniform(m, 50, 30, rng);
  const float limit = std::sqrt(6.0f / 80.0f);
  EXPECT_LE(m.cwiseAbs().maxCoeff(), limit);
  EXPECT_GT(m.cwiseAbs().maxCoeff(), 0.9f * limit);
}

TEST(Softmax, RowsArePositiveAndSumToOne) {
  Rng rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix logits = random_matrix(1 + static_cast<Eigen::Index>(rng.uniform_index(8)),
                                        2 + static_cast<Eigen::Index>(rng.uniform_index(4)), rng, 30.0f);
    const Matrix p = softmax_rows(logits);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      EXPECT_NEAR(p.row(r).sum(), 1.0f, 1e-5f);
      EXPECT_GE(p.row(r).minCoeff(), 0.0f);
    }
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Param p("p", {1, 2}, 1, 2);
  p.value << 1.0f, -1.0f;
  p.grad << 0.5f, -2.0f;
  Adam opt({&p}, AdamOptions{0.1f});
  opt.step();
  EXPECT_NEAR(p.value(0, 0), 0.9f, 1e-5f);
  EXPECT_NEAR(p.value(0, 1), -0.9f, 1e-5f);
}

TEST(Adam, FrozenParametersUntouched) {
  Param p("p", {1, 1}, 1, 1);
  p.trainable = false;
  p.value << 3.0f;
  p.grad << 1.0f;
  Adam opt({&p}, AdamOptions{});
  opt.step();
  EXPECT_EQ(p.value(0, 0), 3.0f);
}

TEST(ParamIo, RoundTripAndMismatch) {
  hateclf::testing::TempDir dir;
  Rng rng(25);
  Dense a("a", 3, 2, rng);
  std::vector<Param*> ps;
  a.collect_params(ps);
  save_params(dir / "p.bin", ps);
  Rng rng2(26);
  Dense b("a", 3, 2, rng2);
  std::vector<Param*> qs;
  b.collect_params(qs);
  load_params(dir / "p.bin", qs);
  EXPECT_EQ(a.kernel().value, b.kernel().value);
  Dense c("a", 3, 4, rng2);
  std::vector<Param*> rs;
  c.collect_params(rs);
  EXPECT_THROW(load_params(dir / "p.bin", rs), Error);
}
