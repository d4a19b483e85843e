#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qstab/gate_params.hpp"
#include "qstab/numerics/matrix.hpp"

// Random instances and conversions to Eigen, which serves as the independent
// reference implementation in the tests.

namespace qstab::test_support {

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  Matrix m = random_matrix(rng, n, n);
  m.symmetrize();
  return m;
}

inline Matrix random_spd(std::mt19937_64& rng, std::size_t n) {
  const Matrix g = random_matrix(rng, n, n);
  Matrix b = g * g.transpose();
  for (std::size_t i = 0; i < n; ++i) b(i, i) += 0.5;
  b.symmetrize();
  return b;
}

inline GateParamMatrix random_alpha(std::mt19937_64& rng, std::size_t gates, std::size_t runs) {
  return GateParamMatrix(random_matrix(rng, gates, runs, 0.0, 3.0));
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Matrix from_eigen(const Eigen::MatrixXd& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace qstab::test_support
