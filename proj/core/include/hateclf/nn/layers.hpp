#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hateclf/nn/tensor.hpp"

namespace hateclf::nn {

// Per-call activation state kept by a layer's forward pass for its backward
// pass. Layers themselves stay const during forward, so a trained model can
// serve concurrent inference.
struct LayerCache {
  virtual ~LayerCache() = default;
};

class Layer {
 public:
  virtual ~Layer() = default;

  // When `cache` is non-null the layer stores what backward() needs in it.
  virtual Tensor forward(const Tensor& x, const ForwardContext& ctx,
                         std::unique_ptr<LayerCache>* cache) const = 0;
  // Accumulates parameter gradients and returns d(loss)/d(input).
  virtual Tensor backward(const Tensor& grad_out, const LayerCache& cache) = 0;

  virtual void collect_params(std::vector<Param*>& out) { (void)out; }
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual std::string describe() const = 0;
};

// Row-wise affine map; time-distributed when steps > 1.
class Dense final : public Layer {
 public:
  Dense(std::string name, int in, int out, Rng& init_rng);

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  void collect_params(std::vector<Param*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  std::string describe() const override;

  const Param& kernel() const { return kernel_; }
  const Param& bias() const { return bias_; }
  Param& kernel() { return kernel_; }
  Param& bias() { return bias_; }

 private:
  Param kernel_;  // in x out
  Param bias_;    // 1 x out
};

class Relu final : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
  std::string describe() const override { return "relu"; }
};

// Inverted dropout: scales kept units by 1/(1-rate) during training,
// identity at inference.
class Dropout final : public Layer {
 public:
  explicit Dropout(float rate);

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }
  std::string describe() const override;
  float rate() const { return rate_; }

 private:
  float rate_;
};

// 1D convolution with "valid" padding and stride 1. Kernel shape
// (kernel, in, out), stored as (kernel * in) x out.
class Conv1D final : public Layer {
 public:
  Conv1D(std::string name, int in, int out, int kernel, Rng& init_rng);

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  void collect_params(std::vector<Param*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1D>(*this); }
  std::string describe() const override;

  const Param& kernel() const { return kernel_; }
  int kernel_size() const { return kernel_size_; }
  static int output_steps(int steps, int kernel) { return steps - kernel + 1; }

 private:
  int in_;
  int out_;
  int kernel_size_;
  Param kernel_;
  Param bias_;
};

// Non-overlapping max pooling over time (stride == pool, "valid").
class MaxPool1D final : public Layer {
 public:
  explicit MaxPool1D(int pool) : pool_(pool) {}

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1D>(*this); }
  std::string describe() const override;
  static int output_steps(int steps, int pool) { return steps / pool; }

 private:
  int pool_;
};

// Max over the time axis; output has steps == 1.
class GlobalMaxPool1D final : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<GlobalMaxPool1D>(*this);
  }
  std::string describe() const override { return "global_max_pool1d"; }
};

// Per-row normalisation over channels with learned gain and shift.
class LayerNorm final : public Layer {
 public:
  LayerNorm(std::string name, int width, float eps);

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  void collect_params(std::vector<Param*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LayerNorm>(*this); }
  std::string describe() const override { return "layer_norm"; }

  Param& gamma() { return gamma_; }
  Param& beta() { return beta_; }

 private:
  float eps_;
  Param gamma_;
  Param beta_;
};

enum class GeluForm { Erf, Tanh };

class Gelu final : public Layer {
 public:
  explicit Gelu(GeluForm form = GeluForm::Erf) : form_(form) {}

  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Gelu>(*this); }
  std::string describe() const override { return "gelu"; }

 private:
  GeluForm form_;
};

class Tanh final : public Layer {
 public:
  Tensor forward(const Tensor& x, const ForwardContext& ctx,
                 std::unique_ptr<LayerCache>* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Tanh>(*this); }
  std::string describe() const override { return "tanh"; }
};

class Sequential {
 public:
  struct Tape {
    std::vector<std::unique_ptr<LayerCache>> caches;
  };

  Sequential() = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  Tensor forward(const Tensor& x, const ForwardContext& ctx, Tape* tape) const;
  Tensor backward(const Tensor& grad_out, const Tape& tape);
  void collect_params(std::vector<Param*>& out);

  std::size_t size() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  std::string describe() const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Initializers matching the usual Keras defaults.
void glorot_uniform(Matrix& m, int fan_in, int fan_out, Rng& rng);
void orthogonal(Matrix& m, Rng& rng);
void uniform_fill(Matrix& m, float lo, float hi, Rng& rng);

// Row-wise softmax of logits.
Matrix softmax_rows(const Matrix& logits);

}  // namespace hateclf::nn
