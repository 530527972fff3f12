#include "hateclf/nn/layers.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>

#include "hateclf/error.hpp"

namespace hateclf::nn {
namespace {

struct InputCache final : LayerCache {
  Tensor input;
};

struct MaskCache final : LayerCache {
  Matrix mask;  // already scaled
};

struct ArgmaxCache final : LayerCache {
  int batch = 0;
  int in_steps = 0;
  int channels = 0;
  std::vector<int> source_row;  // per output cell: input row of the winner
};

template <typename C>
const C& as(const LayerCache& cache) {
  return static_cast<const C&>(cache);
}

}  // namespace

void uniform_fill(Matrix& m, float lo, float hi, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<float>(rng.uniform(lo, hi));
  }
}

void glorot_uniform(Matrix& m, int fan_in, int fan_out, Rng& rng) {
  const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  uniform_fill(m, -limit, limit, rng);
}

void orthogonal(Matrix& m, Rng& rng) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const bool tall = rows >= cols;
  const Eigen::Index r = tall ? rows : cols;
  const Eigen::Index c = tall ? cols : rows;
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  const Eigen::MatrixXd rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < c; ++j) {
    if (rmat(j, j) < 0) q.col(j) *= -1.0;
  }
  if (tall) {
    m = q.cast<float>();
  } else {
    m = q.transpose().cast<float>();
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const float mx = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

// ---- Dense ----------------------------------------------------------------

Dense::Dense(std::string name, int in, int out, Rng& init_rng)
    : kernel_(name + ".kernel", {in, out}, in, out), bias_(name + ".bias", {out}, 1, out) {
  glorot_uniform(kernel_.value, in, out, init_rng);
}

Tensor Dense::forward(const Tensor& x, const ForwardContext&,
                      std::unique_ptr<LayerCache>* cache) const {
  if (x.channels() != kernel_.value.rows()) {
    throw Error(ErrorKind::Input, kernel_.name + ": expected " +
                                      std::to_string(kernel_.value.rows()) + " features, got " +
                                      std::to_string(x.channels()));
  }
  Matrix y = x.data * kernel_.value;
  y.rowwise() += bias_.value.row(0);
  if (cache) {
    auto c = std::make_unique<InputCache>();
    c->input = x;
    *cache = std::move(c);
  }
  return {x.batch, x.steps, std::move(y)};
}

Tensor Dense::backward(const Tensor& grad_out, const LayerCache& cache) {
  const Tensor& x = as<InputCache>(cache).input;
  kernel_.grad.noalias() += x.data.transpose() * grad_out.data;
  bias_.grad.row(0) += grad_out.data.colwise().sum();
  return {x.batch, x.steps, grad_out.data * kernel_.value.transpose()};
}

void Dense::collect_params(std::vector<Param*>& out) {
  out.push_back(&kernel_);
  out.push_back(&bias_);
}

std::string Dense::describe() const {
  std::ostringstream s;
  s << "dense(" << kernel_.value.rows() << "->" << kernel_.value.cols() << ")";
  return s.str();
}

// ---- Relu -----------------------------------------------------------------

Tensor Relu::forward(const Tensor& x, const ForwardContext&,
                     std::unique_ptr<LayerCache>* cache) const {
  Tensor y{x.batch, x.steps, x.data.cwiseMax(0.0f)};
  if (cache) {
    auto c = std::make_unique<InputCache>();
    c->input = x;
    *cache = std::move(c);
  }
  return y;
}

Tensor Relu::backward(const Tensor& grad_out, const LayerCache& cache) {
  const Tensor& x = as<InputCache>(cache).input;
  Matrix g = (x.data.array() > 0.0f).select(grad_out.data, 0.0f);
  return {x.batch, x.steps, std::move(g)};
}

// ---- Dropout --------------------------------------------------------------

Dropout::Dropout(float rate) : rate_(rate) {
  if (!(rate >= 0.0f && rate < 1.0f)) throw Error(ErrorKind::Config, "dropout rate must be in [0,1)");
}

Tensor Dropout::forward(const Tensor& x, const ForwardContext& ctx,
                        std::unique_ptr<LayerCache>* cache) const {
  if (!ctx.training() || rate_ == 0.0f) {
    if (cache) {
      auto c = std::make_unique<MaskCache>();
      c->mask = Matrix::Ones(x.data.rows(), x.data.cols());
      *cache = std::move(c);
    }
    return x;
  }
  if (!ctx.rng) throw Error(ErrorKind::Config, "dropout in training phase needs an rng");
  const float scale = 1.0f / (1.0f - rate_);
  Matrix mask(x.data.rows(), x.data.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = ctx.rng->bernoulli(rate_) ? 0.0f : scale;
  }
  Tensor y{x.batch, x.steps, x.data.cwiseProduct(mask)};
  if (cache) {
    auto c = std::make_unique<MaskCache>();
    c->mask = std::move(mask);
    *cache = std::move(c);
  }
  return y;
}

Tensor Dropout::backward(const Tensor& grad_out, const LayerCache& cache) {
  return {grad_out.batch, grad_out.steps, grad_out.data.cwiseProduct(as<MaskCache>(cache).mask)};
}

std::string Dropout::describe() const {
  std::ostringstream s;
  s << "dropout(" << rate_ << ")";
  return s.str();
}

// ---- Conv1D ---------------------------------------------------------------

Conv1D::Conv1D(std::string name, int in, int out, int kernel, Rng& init_rng)
    : in_(in),
      out_(out),
      kernel_size_(kernel),
      kernel_(name + ".kernel", {kernel, in, out}, kernel * in, out),
      bias_(name + ".bias", {out}, 1, out) {
  glorot_uniform(kernel_.value, kernel * in, kernel * out, init_rng);
}

Tensor Conv1D::forward(const Tensor& x, const ForwardContext&,
                       std::unique_ptr<LayerCache>* cache) const {
  if (x.channels() != in_) {
    throw Error(ErrorKind::Input, kernel_.name + ": expected " + std::to_string(in_) +
                                      " channels, got " + std::to_string(x.channels()));
  }
  const int out_steps = output_steps(x.steps, kernel_size_);
  if (out_steps < 1) {
    throw Error(ErrorKind::Input, kernel_.name + ": sequence of " + std::to_string(x.steps) +
                                      " steps is shorter than the kernel");
  }
  using Windows = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;
  Matrix y(static_cast<Eigen::Index>(x.batch) * out_steps, out_);
  for (int b = 0; b < x.batch; ++b) {
    // Row t of `windows` is the contiguous slice x[b, t .. t+k-1, :].
    Windows windows(x.data.data() + static_cast<Eigen::Index>(b) * x.steps * in_, out_steps,
                    static_cast<Eigen::Index>(kernel_size_) * in_, Eigen::OuterStride<>(in_));
    y.middleRows(static_cast<Eigen::Index>(b) * out_steps, out_steps).noalias() =
        windows * kernel_.value;
  }
  y.rowwise() += bias_.value.row(0);
  if (cache) {
    auto c = std::make_unique<InputCache>();
    c->input = x;
    *cache = std::move(c);
  }
  return {x.batch, out_steps, std::move(y)};
}

Tensor Conv1D::backward(const Tensor& grad_out, const LayerCache& cache) {
  const Tensor& x = as<InputCache>(cache).input;
  const int out_steps = grad_out.steps;
  using Windows = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;
  Matrix dx = Matrix::Zero(x.data.rows(), x.data.cols());
  bias_.grad.row(0) += grad_out.data.colwise().sum();
  for (int b = 0; b < x.batch; ++b) {
    const Eigen::Index in_row = static_cast<Eigen::Index>(b) * x.steps;
    Windows windows(x.data.data() + in_row * in_, out_steps,
                    static_cast<Eigen::Index>(kernel_size_) * in_, Eigen::OuterStride<>(in_));
    const auto dy = grad_out.data.middleRows(static_cast<Eigen::Index>(b) * out_steps, out_steps);
    kernel_.grad.noalias() += windows.transpose() * dy;
    const Matrix dwin = dy * kernel_.value.transpose();  // out_steps x (k * in)
    for (int j = 0; j < kernel_size_; ++j) {
      dx.middleRows(in_row + j, out_steps) += dwin.middleCols(static_cast<Eigen::Index>(j) * in_, in_);
    }
  }
  return {x.batch, x.steps, std::move(dx)};
}

void Conv1D::collect_params(std::vector<Param*>& out) {
  out.push_back(&kernel_);
  out.push_back(&bias_);
}

std::string Conv1D::describe() const {
  std::ostringstream s;
  s << "conv1d(filters=" << out_ << ", kernel=" << kernel_size_ << ", in=" << in_ << ")";
  return s.str();
}

// ---- Pooling ----------------------------------------------------------------

Tensor MaxPool1D::forward(const Tensor& x, const ForwardContext&,
                          std::unique_ptr<LayerCache>* cache) const {
  const int out_steps = output_steps(x.steps, pool_);
  if (out_steps < 1) {
    throw Error(ErrorKind::Input, "max_pool1d: sequence of " + std::to_string(x.steps) +
                                      " steps is shorter than the pool");
  }
  const int ch = x.channels();
  Matrix y(static_cast<Eigen::Index>(x.batch) * out_steps, ch);
  std::vector<int> src(static_cast<std::size_t>(y.size()));
  for (int b = 0; b < x.batch; ++b) {
    for (int t = 0; t < out_steps; ++t) {
      const int orow = b * out_steps + t;
      for (int c = 0; c < ch; ++c) {
        int best = b * x.steps + t * pool_;
        for (int p = 1; p < pool_; ++p) {
          const int r = b * x.steps + t * pool_ + p;
          if (x.data(r, c) > x.data(best, c)) best = r;
        }
        y(orow, c) = x.data(best, c);
        src[static_cast<std::size_t>(orow) * ch + c] = best;
      }
    }
  }
  if (cache) {
    auto cc = std::make_unique<ArgmaxCache>();
    cc->batch = x.batch;
    cc->in_steps = x.steps;
    cc->channels = ch;
    cc->source_row = std::move(src);
    *cache = std::move(cc);
  }
  return {x.batch, out_steps, std::move(y)};
}

Tensor MaxPool1D::backward(const Tensor& grad_out, const LayerCache& cache) {
  const auto& c = as<ArgmaxCache>(cache);
  Matrix dx = Matrix::Zero(static_cast<Eigen::Index>(c.batch) * c.in_steps, c.channels);
  for (Eigen::Index r = 0; r < grad_out.data.rows(); ++r) {
    for (int ch = 0; ch < c.channels; ++ch) {
      dx(c.source_row[static_cast<std::size_t>(r) * c.channels + ch], ch) += grad_out.data(r, ch);
    }
  }
  return {c.batch, c.in_steps, std::move(dx)};
}

std::string MaxPool1D::describe() const { return "max_pool1d(" + std::to_string(pool_) + ")"; }

Tensor GlobalMaxPool1D::forward(const Tensor& x, const ForwardContext&,
                                std::unique_ptr<LayerCache>* cache) const {
  const int ch = x.channels();
  Matrix y(x.batch, ch);
  std::vector<int> src(static_cast<std::size_t>(x.batch) * ch);
  for (int b = 0; b < x.batch; ++b) {
    for (int c = 0; c < ch; ++c) {
      int best = b * x.steps;
      for (int t = 1; t < x.steps; ++t) {
        const int r = b * x.steps + t;
        if (x.data(r, c) > x.data(best, c)) best = r;
      }
      y(b, c) = x.data(best, c);
      src[static_cast<std::size_t>(b) * ch + c] = best;
    }
  }
  if (cache) {
    auto cc = std::make_unique<ArgmaxCache>();
    cc->batch = x.batch;
    cc->in_steps = x.steps;
    cc->channels = ch;
    cc->source_row = std::move(src);
    *cache = std::move(cc);
  }
  return {x.batch, 1, std::move(y)};
}

Tensor GlobalMaxPool1D::backward(const Tensor& grad_out, const LayerCache& cache) {
  const auto& c = as<ArgmaxCache>(cache);
  Matrix dx = Matrix::Zero(static_cast<Eigen::Index>(c.batch) * c.in_steps, c.channels);
  for (int b = 0; b < c.batch; ++b) {
    for (int ch = 0; ch < c.channels; ++ch) {
      dx(c.source_row[static_cast<std::size_t>(b) * c.channels + ch], ch) += grad_out.data(b, ch);
    }
  }
  return {c.batch, c.in_steps, std::move(dx)};
}

// ---- LayerNorm / Gelu / Tanh ----------------------------------------------

namespace {

struct NormCache final : LayerCache {
  int batch = 0;
  int steps = 0;
  Matrix normalized;
  Eigen::VectorXf inv_std;
};

}  // namespace

LayerNorm::LayerNorm(std::string name, int width, float eps)
    : eps_(eps),
      gamma_(name + ".gamma", {width}, 1, width),
      beta_(name + ".beta", {width}, 1, width) {
  gamma_.value.setOnes();
}

Tensor LayerNorm::forward(const Tensor& x, const ForwardContext&,
                          std::unique_ptr<LayerCache>* cache) const {
  const Eigen::Index n = x.data.rows();
  const auto width = static_cast<float>(x.data.cols());
  Matrix xhat(n, x.data.cols());
  Eigen::VectorXf inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const float mean = x.data.row(i).sum() / width;
    const auto centered = x.data.row(i).array() - mean;
    const float var = centered.square().sum() / width;
    inv_std(i) = 1.0f / std::sqrt(var + eps_);
    xhat.row(i) = centered * inv_std(i);
  }
  Matrix y = (xhat.array().rowwise() * gamma_.value.row(0).array()).rowwise() +
             beta_.value.row(0).array();
  if (cache) {
    auto c = std::make_unique<NormCache>();
    c->batch = x.batch;
    c->steps = x.steps;
    c->normalized = std::move(xhat);
    c->inv_std = std::move(inv_std);
    *cache = std::move(c);
  }
  return {x.batch, x.steps, std::move(y)};
}

Tensor LayerNorm::backward(const Tensor& grad_out, const LayerCache& cache) {
  const auto& c = as<NormCache>(cache);
  const Matrix& xhat = c.normalized;
  gamma_.grad.row(0) += (grad_out.data.cwiseProduct(xhat)).colwise().sum();
  beta_.grad.row(0) += grad_out.data.colwise().sum();
  const auto width = static_cast<float>(xhat.cols());
  Matrix dxhat = grad_out.data.array().rowwise() * gamma_.value.row(0).array();
  Matrix dx(xhat.rows(), xhat.cols());
  for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
    const float mean_d = dxhat.row(i).sum() / width;
    const float mean_dx = dxhat.row(i).dot(xhat.row(i)) / width;
    dx.row(i) = c.inv_std(i) * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx);
  }
  return {c.batch, c.steps, std::move(dx)};
}

void LayerNorm::collect_params(std::vector<Param*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

Tensor Gelu::forward(const Tensor& x, const ForwardContext&,
                     std::unique_ptr<LayerCache>* cache) const {
  Matrix y(x.data.rows(), x.data.cols());
  constexpr float kInvSqrt2 = 0.70710678118654752f;
  constexpr float kSqrt2OverPi = 0.79788456080286536f;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const float v = x.data.data()[i];
    if (form_ == GeluForm::Erf) {
      y.data()[i] = 0.5f * v * (1.0f + std::erf(v * kInvSqrt2));
    } else {
      y.data()[i] = 0.5f * v * (1.0f + std::tanh(kSqrt2OverPi * (v + 0.044715f * v * v * v)));
    }
  }
  if (cache) {
    auto c = std::make_unique<InputCache>();
    c->input = x;
    *cache = std::move(c);
  }
  return {x.batch, x.steps, std::move(y)};
}

Tensor Gelu::backward(const Tensor& grad_out, const LayerCache& cache) {
  const Tensor& x = as<InputCache>(cache).input;
  Matrix dx(x.data.rows(), x.data.cols());
  constexpr float kInvSqrt2 = 0.70710678118654752f;
  constexpr float kInvSqrt2Pi = 0.39894228040143268f;
  constexpr float kSqrt2OverPi = 0.79788456080286536f;
  for (Eigen::Index i = 0; i < dx.size(); ++i) {
    const float v = x.data.data()[i];
    float d;
    if (form_ == GeluForm::Erf) {
      d = 0.5f * (1.0f + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5f * v * v);
    } else {
      const float u = kSqrt2OverPi * (v + 0.044715f * v * v * v);
      const float th = std::tanh(u);
      const float du = kSqrt2OverPi * (1.0f + 3.0f * 0.044715f * v * v);
      d = 0.5f * (1.0f + th) + 0.5f * v * (1.0f - th * th) * du;
    }
    dx.data()[i] = grad_out.data.data()[i] * d;
  }
  return {x.batch, x.steps, std::move(dx)};
}

Tensor Tanh::forward(const Tensor& x, const ForwardContext&,
                     std::unique_ptr<LayerCache>* cache) const {
  Tensor y{x.batch, x.steps, x.data.array().tanh().matrix()};
  if (cache) {
    auto c = std::make_unique<InputCache>();
    c->input = y;  // output is enough for the derivative
    *cache = std::move(c);
  }
  return y;
}

Tensor Tanh::backward(const Tensor& grad_out, const LayerCache& cache) {
  const Tensor& y = as<InputCache>(cache).input;
  Matrix dx = grad_out.data.array() * (1.0f - y.data.array().square());
  return {y.batch, y.steps, std::move(dx)};
}

// ---- Sequential ---------------------------------------------------------------

Sequential::Sequential(const Sequential& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Sequential& Sequential::operator=(const Sequential& other) {
  if (this != &other) {
    Sequential copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor Sequential::forward(const Tensor& x, const ForwardContext& ctx, Tape* tape) const {
  if (tape) {
    tape->caches.clear();
    tape->caches.resize(layers_.size());
  }
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, ctx, tape ? &tape->caches[i] : nullptr);
  }
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out, const Tape& tape) {
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, *tape.caches[i]);
  return g;
}

void Sequential::collect_params(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect_params(out);
}

std::string Sequential::describe() const {
  std::string s;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i) s += " -> ";
    s += layers_[i]->describe();
  }
  return s;
}

}  // namespace hateclf::nn
