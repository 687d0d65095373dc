#pragma once

#include <Eigen/Dense>
#include <random>

#include "ballbot/nn/tensor.hpp"

namespace ballbot::nn {

// Orthogonal init: QR of a Gaussian matrix, sign-fixed by diag(R), scaled by
// gain. Tensors with >2 dims are treated as [dim0, rest].
template <typename T>
void orthogonal_init(Tensor<T>& w, double gain, std::mt19937_64& rng) {
  const std::int64_t rows = w.dim(0);
  const std::int64_t cols = w.size() / rows;
  const bool transpose = rows < cols;
  const std::int64_t r = transpose ? cols : rows;
  const std::int64_t c = transpose ? rows : cols;

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(r, c);
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j) a(i, j) = normal(rng);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  const Eigen::MatrixXd rmat = qr.matrixQR().topRows(c).template triangularView<Eigen::Upper>();
  for (std::int64_t j = 0; j < c; ++j)
    if (rmat(j, j) < 0.0) q.col(j) *= -1.0;

  if (transpose) q = q.transpose().eval();
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j)
      w[i * cols + j] = static_cast<T>(gain * q(i, j));
}

}  // namespace ballbot::nn
