#include "hateclf/nn/adam.hpp"

#include <cmath>

namespace hateclf::nn {

Adam::Adam(std::vector<Param*> params, AdamOptions options)
    : params_(std::move(params)), opt_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(opt_.beta1), static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(static_cast<double>(opt_.beta2), static_cast<double>(t_));
  const auto lr_t = static_cast<float>(opt_.learning_rate * std::sqrt(bc2) / bc1);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    if (!p.trainable) continue;
    m_[i] = opt_.beta1 * m_[i] + (1.0f - opt_.beta1) * p.grad;
    v_[i] = opt_.beta2 * v_[i] + (1.0f - opt_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr_t * m_[i].array() / (v_[i].array().sqrt() + opt_.epsilon);
  }
}

}  // namespace hateclf::nn
