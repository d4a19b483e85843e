#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "qstab/error.hpp"
#include "qstab/numerics/matrix.hpp"

namespace qstab {

/// Eigenpairs sorted by ascending eigenvalue; column j of `eigenvectors`
/// belongs to `eigenvalues[j]`.
struct GenEigResult {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
  bool b_normalized = false;  // columns satisfy vᵀBv = 1
};

inline constexpr int kJacobiSweepBudget = 100;

/// Lower-triangular G with G·Gᵀ = B.
inline Matrix cholesky(const Matrix& b) {
  require(b.is_square(), ErrorCode::DimensionMismatch, "cholesky needs a square matrix");
  require(b.is_symmetric(1e-10), ErrorCode::InvalidArgument, "cholesky needs a symmetric matrix");
  const std::size_t n = b.rows();
  Matrix g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = b(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= g(j, k) * g(j, k);
    if (!(pivot > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    const double gjj = std::sqrt(pivot);
    g(j, j) = gjj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = b(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= g(i, k) * g(j, k);
      g(i, j) = s / gjj;
    }
  }
  return g;
}

/// Solves G·X = Y for lower-triangular G, column by column.
inline Matrix solve_lower(const Matrix& g, const Matrix& y) {
  require(g.is_square() && g.rows() == y.rows(), ErrorCode::DimensionMismatch, "solve_lower");
  const std::size_t n = g.rows();
  Matrix x(n, y.cols());
  for (std::size_t c = 0; c < y.cols(); ++c)
    for (std::size_t i = 0; i < n; ++i) {
      double s = y(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= g(i, k) * x(k, c);
      x(i, c) = s / g(i, i);
    }
  return x;
}

/// Solves Gᵀ·X = Y for lower-triangular G.
inline Matrix solve_lower_transpose(const Matrix& g, const Matrix& y) {
  require(g.is_square() && g.rows() == y.rows(), ErrorCode::DimensionMismatch,
          "solve_lower_transpose");
  const std::size_t n = g.rows();
  Matrix x(n, y.cols());
  for (std::size_t c = 0; c < y.cols(); ++c)
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= g(k, ii) * x(k, c);
      x(ii, c) = s / g(ii, ii);
    }
  return x;
}

namespace detail {

// Flip each column so that its first entry of non-negligible magnitude is positive.
inline void canonicalize_signs(Matrix& v) {
  for (std::size_t j = 0; j < v.cols(); ++j) {
    double scale = 0.0;
    for (std::size_t i = 0; i < v.rows(); ++i) scale = std::max(scale, std::abs(v(i, j)));
    for (std::size_t i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > 1e-8 * scale) {
        if (v(i, j) < 0.0)
          for (std::size_t k = 0; k < v.rows(); ++k) v(k, j) = -v(k, j);
        break;
      }
    }
  }
}

inline GenEigResult sorted_result(const Matrix& diag_source, const Matrix& vectors) {
  const std::size_t n = diag_source.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return diag_source(a, a) < diag_source(b, b);
  });
  GenEigResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(vectors.rows(), n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = diag_source(order[j], order[j]);
    for (std::size_t i = 0; i < vectors.rows(); ++i) out.eigenvectors(i, j) = vectors(i, order[j]);
  }
  return out;
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvectors are
/// orthonormal, eigenvalues ascending.
inline GenEigResult sym_eig(const Matrix& a_in) {
  require(a_in.is_square(), ErrorCode::DimensionMismatch, "sym_eig needs a square matrix");
  require(a_in.is_symmetric(1e-10), ErrorCode::InvalidArgument, "sym_eig needs a symmetric matrix");
  Matrix a = a_in;
  a.symmetrize();
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = 1e-17 * a.frobenius_norm();

  bool converged = false;
  for (int sweep = 0; sweep < kJacobiSweepBudget && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= floor ||
            std::abs(apq) <= eps * std::sqrt(std::abs(a(p, p)) * std::abs(a(q, q)))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence,
                "Jacobi did not converge within " + std::to_string(kJacobiSweepBudget) + " sweeps");
  }
  GenEigResult out = detail::sorted_result(a, v);
  detail::canonicalize_signs(out.eigenvectors);
  return out;
}

/// Solves A·s = λ·B·s for symmetric A and symmetric positive-definite B by
/// Cholesky reduction. Columns of the result are B-orthonormal.
inline GenEigResult gen_sym_eig(const Matrix& a, const Matrix& b) {
  require(a.is_square() && b.is_square() && a.rows() == b.rows(), ErrorCode::DimensionMismatch,
          "gen_sym_eig needs square matrices of equal size");
  require(a.is_symmetric(1e-10), ErrorCode::InvalidArgument, "gen_sym_eig: A not symmetric");
  const Matrix g = cholesky(b);
  // C = G⁻¹ A G⁻ᵀ; A symmetric so G⁻¹(G⁻¹A)ᵀ gives it directly.
  Matrix c = solve_lower(g, solve_lower(g, a).transpose());
  c.symmetrize();
  GenEigResult reduced = sym_eig(c);
  GenEigResult out;
  out.eigenvalues = std::move(reduced.eigenvalues);
  out.eigenvectors = solve_lower_transpose(g, reduced.eigenvectors);
  detail::canonicalize_signs(out.eigenvectors);
  out.b_normalized = true;
  return out;
}

/// Orthonormal polar factor U of a full-column-rank S (S = U·P, P symmetric
/// positive definite), so UᵀU = I.
inline Matrix polar_factor(const Matrix& s) {
  require(s.cols() <= s.rows(), ErrorCode::DimensionMismatch, "polar_factor needs cols <= rows");
  const Matrix gram = s.transpose() * s;
  const GenEigResult eig = sym_eig(gram);
  const std::size_t m = s.cols();
  Matrix inv_sqrt(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    const double d = eig.eigenvalues[k];
    require(d > 0.0, ErrorCode::DegenerateData, "polar_factor: S is rank deficient");
    const double w = 1.0 / std::sqrt(d);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        inv_sqrt(i, j) += w * eig.eigenvectors(i, k) * eig.eigenvectors(j, k);
  }
  Matrix u = s * inv_sqrt;
  // Newton-Schulz polish; the eigen route loses accuracy when S is badly conditioned.
  const Matrix eye = Matrix::identity(m);
  for (int it = 0; it < 20; ++it) {
    const Matrix utu = u.transpose() * u;
    if (max_abs_diff(utu, eye) < 1e-15) break;
    u = u * ((3.0 * eye - utu) * 0.5);
  }
  return u;
}

}  // namespace qstab
