#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "hateclf/rng.hpp"

namespace hateclf::nn {

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<float, 1, Eigen::Dynamic, Eigen::RowMajor>;

/// Trainable (or frozen) parameter block. `shape` is the logical tensor shape;
/// `value` stores it flattened to rows x cols with the last dimension as cols.
struct Param {
  std::string name;
  std::vector<int> shape;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, std::vector<int> s, int rows, int cols)
      : name(std::move(n)), shape(std::move(s)), value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// A batch of feature sequences stored as (batch * steps) x channels with
/// row index b * steps + t. Flat feature batches use steps == 1.
struct Tensor {
  int batch = 0;
  int steps = 1;
  Matrix data;

  Tensor() = default;
  Tensor(int b, int t, Matrix m) : batch(b), steps(t), data(std::move(m)) {}
  int channels() const { return static_cast<int>(data.cols()); }
};

/// Token ids laid out row-major as batch x steps.
struct IndexBatch {
  int batch = 0;
  int steps = 0;
  std::vector<std::int32_t> ids;

  std::int32_t at(int b, int t) const { return ids[static_cast<std::size_t>(b * steps + t)]; }
};

enum class Phase { Inference, Training };

struct ForwardContext {
  Phase phase = Phase::Inference;
  Rng* rng = nullptr;  // required for dropout in training phase

  bool training() const { return phase == Phase::Training; }
};

}  // namespace hateclf::nn
