#pragma once

#include <vector>

#include "hateclf/nn/tensor.hpp"

namespace hateclf::nn {

struct AdamOptions {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-7f;
};

// Adaptive-moment optimizer. Parameters with trainable == false are never
// written.
class Adam {
 public:
  Adam(std::vector<Param*> params, AdamOptions options);

  void step();
  void zero_grad();
  long steps_taken() const { return t_; }

 private:
  std::vector<Param*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamOptions opt_;
  long t_ = 0;
};

}  // namespace hateclf::nn
