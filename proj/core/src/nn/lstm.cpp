#include "hateclf/nn/lstm.hpp"

#include <sstream>

#include "hateclf/error.hpp"

namespace hateclf::nn {
namespace {

struct LstmCache final : LayerCache {
  Tensor input;
  // Time-major, indexed by position t (not processing order).
  std::vector<Matrix> gates;   // B x 4H, post-activation (i, f, g, o)
  std::vector<Matrix> cell;    // B x H
  std::vector<Matrix> tanh_cell;
  std::vector<Matrix> hidden;  // B x H
};

struct BiCache final : LayerCache {
  std::unique_ptr<LayerCache> fwd;
  std::unique_ptr<LayerCache> bwd;
};

inline float sigmoid(float z) { return 1.0f / (1.0f + std::exp(-z)); }

}  // namespace

Lstm::Lstm(std::string name, int in, int hidden, bool reverse, Rng& init_rng)
    : in_(in),
      hidden_(hidden),
      reverse_(reverse),
      kernel_(name + ".kernel", {in, 4 * hidden}, in, 4 * hidden),
      recurrent_(name + ".recurrent_kernel", {hidden, 4 * hidden}, hidden, 4 * hidden),
      bias_(name + ".bias", {4 * hidden}, 1, 4 * hidden) {
  glorot_uniform(kernel_.value, in, 4 * hidden, init_rng);
  orthogonal(recurrent_.value, init_rng);
  bias_.value.block(0, hidden, 1, hidden).setOnes();
}

Tensor Lstm::forward(const Tensor& x, const ForwardContext&,
                     std::unique_ptr<LayerCache>* cache) const {
  if (x.channels() != in_) {
    throw Error(ErrorKind::Input, kernel_.name + ": expected " + std::to_string(in_) +
                                      " features, got " + std::to_string(x.channels()));
  }
  const int B = x.batch;
  const int T = x.steps;
  const int H = hidden_;
  Matrix projected = x.data * kernel_.value;  // (B*T) x 4H
  projected.rowwise() += bias_.value.row(0);

  using Strided = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;
  auto LstmAt = [&](int t) {
    return Strided(projected.data() + static_cast<Eigen::Index>(t) * 4 * H, B, 4 * H,
                   Eigen::OuterStride<>(static_cast<Eigen::Index>(T) * 4 * H));
  };

  std::unique_ptr<LstmCache> c;
  if (cache) {
    c = std::make_unique<LstmCache>();
    c->gates.resize(T);
    c->cell.resize(T);
    c->tanh_cell.resize(T);
    c->hidden.resize(T);
  }

  Matrix y(static_cast<Eigen::Index>(B) * T, H);
  Matrix h = Matrix::Zero(B, H);
  Matrix cell = Matrix::Zero(B, H);
  Matrix z(B, 4 * H);
  for (int step = 0; step < T; ++step) {
    const int t = reverse_ ? T - 1 - step : step;
    z = LstmAt(t);
    z.noalias() += h * recurrent_.value;
    for (int b = 0; b < B; ++b) {
      for (int j = 0; j < H; ++j) {
        z(b, j) = sigmoid(z(b, j));
        z(b, H + j) = sigmoid(z(b, H + j));
        z(b, 2 * H + j) = std::tanh(z(b, 2 * H + j));
        z(b, 3 * H + j) = sigmoid(z(b, 3 * H + j));
      }
    }
    cell = z.middleCols(H, H).cwiseProduct(cell) +
           z.leftCols(H).cwiseProduct(z.middleCols(2 * H, H));
    Matrix tc = cell.array().tanh();
    h = z.rightCols(H).cwiseProduct(tc);
    for (int b = 0; b < B; ++b) y.row(static_cast<Eigen::Index>(b) * T + t) = h.row(b);
    if (c) {
      c->gates[t] = z;
      c->cell[t] = cell;
      c->tanh_cell[t] = std::move(tc);
      c->hidden[t] = h;
    }
  }
  if (c) {
    c->input = x;
    *cache = std::move(c);
  }
  return {B, T, std::move(y)};
}

Tensor Lstm::backward(const Tensor& grad_out, const LayerCache& cache) {
  const auto& c = static_cast<const LstmCache&>(cache);
  const Tensor& x = c.input;
  const int B = x.batch;
  const int T = x.steps;
  const int H = hidden_;

  Matrix dz_all(static_cast<Eigen::Index>(B) * T, 4 * H);
  Matrix dh_next = Matrix::Zero(B, H);
  Matrix dc_next = Matrix::Zero(B, H);
  Matrix dz(B, 4 * H);
  const Matrix zeros = Matrix::Zero(B, H);

  for (int step = T - 1; step >= 0; --step) {
    const int t = reverse_ ? T - 1 - step : step;
    const int prev_t = reverse_ ? t + 1 : t - 1;
    const bool has_prev = step > 0;
    const Matrix& g = c.gates[t];
    const Matrix& tc = c.tanh_cell[t];
    const Matrix& c_prev = has_prev ? c.cell[prev_t] : zeros;
    const Matrix& h_prev = has_prev ? c.hidden[prev_t] : zeros;

    for (int b = 0; b < B; ++b) {
      const Eigen::Index row = static_cast<Eigen::Index>(b) * T + t;
      for (int j = 0; j < H; ++j) {
        const float gi = g(b, j);
        const float gf = g(b, H + j);
        const float gg = g(b, 2 * H + j);
        const float go = g(b, 3 * H + j);
        const float dh = grad_out.data(row, j) + dh_next(b, j);
        const float tcj = tc(b, j);
        const float dcell = dc_next(b, j) + dh * go * (1.0f - tcj * tcj);
        dz(b, j) = dcell * gg * gi * (1.0f - gi);
        dz(b, H + j) = dcell * c_prev(b, j) * gf * (1.0f - gf);
        dz(b, 2 * H + j) = dcell * gi * (1.0f - gg * gg);
        dz(b, 3 * H + j) = dh * tcj * go * (1.0f - go);
        dc_next(b, j) = dcell * gf;
      }
      dz_all.row(row) = dz.row(b);
    }
    if (has_prev) recurrent_.grad.noalias() += h_prev.transpose() * dz;
    dh_next.noalias() = dz * recurrent_.value.transpose();
  }
  kernel_.grad.noalias() += x.data.transpose() * dz_all;
  bias_.grad.row(0) += dz_all.colwise().sum();
  return {B, T, dz_all * kernel_.value.transpose()};
}

void Lstm::collect_params(std::vector<Param*>& out) {
  out.push_back(&kernel_);
  out.push_back(&recurrent_);
  out.push_back(&bias_);
}

std::string Lstm::describe() const {
  std::ostringstream s;
  s << "lstm(" << hidden_ << (reverse_ ? ", reverse" : "") << ", return_sequences)";
  return s.str();
}

Bidirectional::Bidirectional(std::string name, int in, int hidden, Rng& init_rng)
    : fwd_(name + ".forward", in, hidden, false, init_rng),
      bwd_(name + ".backward", in, hidden, true, init_rng) {}

Tensor Bidirectional::forward(const Tensor& x, const ForwardContext& ctx,
                              std::unique_ptr<LayerCache>* cache) const {
  std::unique_ptr<BiCache> c = cache ? std::make_unique<BiCache>() : nullptr;
  Tensor f = fwd_.forward(x, ctx, c ? &c->fwd : nullptr);
  Tensor r = bwd_.forward(x, ctx, c ? &c->bwd : nullptr);
  Matrix y(f.data.rows(), f.data.cols() + r.data.cols());
  y << f.data, r.data;
  if (c) *cache = std::move(c);
  return {x.batch, x.steps, std::move(y)};
}

Tensor Bidirectional::backward(const Tensor& grad_out, const LayerCache& cache) {
  const auto& c = static_cast<const BiCache&>(cache);
  const int H = fwd_.hidden();
  Tensor gf{grad_out.batch, grad_out.steps, grad_out.data.leftCols(H)};
  Tensor gr{grad_out.batch, grad_out.steps, grad_out.data.rightCols(H)};
  Tensor dxf = fwd_.backward(gf, *c.fwd);
  Tensor dxr = bwd_.backward(gr, *c.bwd);
  dxf.data += dxr.data;
  return dxf;
}

void Bidirectional::collect_params(std::vector<Param*>& out) {
  fwd_.collect_params(out);
  bwd_.collect_params(out);
}

std::string Bidirectional::describe() const {
  return "bidirectional(lstm(" + std::to_string(fwd_.hidden()) + "), concat)";
}

}  // namespace hateclf::nn
