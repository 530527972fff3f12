#pragma once

#include "hateclf/nn/layers.hpp"

namespace hateclf::nn {

// LSTM returning the full hidden sequence. Gate order i, f, c, o; forget bias
// initialised to 1. With `reverse` the sequence is consumed back to front but
// outputs stay aligned with input positions.
class Lstm final : public Layer {
 public:
  Lstm(std::string name, int in, int hidden, bool reverse, Rng& init_rng);

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  void collect_params(std::vector<Param*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lstm>(*this); }
  std::string describe() const override;

  int hidden() const { return hidden_; }
  const Param& kernel() const { return kernel_; }
  const Param& recurrent_kernel() const { return recurrent_; }

 private:
  int in_;
  int hidden_;
  bool reverse_;
  Param kernel_;     // in x 4H
  Param recurrent_;  // H x 4H
  Param bias_;       // 1 x 4H
};

// Forward and reverse LSTMs over the same input, outputs concatenated
// per position (width 2H).
class Bidirectional final : public Layer {
 public:
  Bidirectional(std::string name, int in, int hidden, Rng& init_rng);

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  void collect_params(std::vector<Param*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Bidirectional>(*this); }
  std::string describe() const override;

  const Lstm& forward_lstm() const { return fwd_; }
  const Lstm& backward_lstm() const { return bwd_; }

 private:
  Lstm fwd_;
  Lstm bwd_;
};

}  // namespace hateclf::nn
