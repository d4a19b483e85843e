#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qstab/circuit.hpp"
#include "qstab/error.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/numerics/eigen.hpp"
#include "qstab/numerics/matrix.hpp"

// Stabilizer matrix from the weighted generalized eigenproblem
//   (Δα σ Δαᵀ) S = λ (Δα η Δαᵀ) S,   σ = I + c(η − W),
// where Δα holds consecutive-run parameter differences and W is a windowed
// Gaussian similarity graph over those differences. β = Sᵀα.

namespace qstab {

/// Gaussian similarity graph over the R−1 difference vectors.
struct WeightGraph {
  Matrix w;      // ω_rs, symmetric, zero outside the window
  Matrix eta;    // diagonal, η_rr = Σ_s ω_rs
  Matrix sigma;  // I + c(η − W)
  std::size_t kappa = 2;
  double zeta = 1.0;
  double c = 1.0;
};

struct StabilizerParams {
  std::size_t kappa = 2;
  std::optional<double> zeta;     // unset: mean nonzero squared distance between differences
  double c = 1.0;
  std::optional<std::size_t> m;   // unset: keep all L eigenvectors
  bool orthogonalize = true;
};

struct StabilizerSolution {
  Matrix s;                          // L×m
  std::vector<double> eigenvalues;   // all L generalized eigenvalues, ascending
  GateParamMatrix beta;              // Sᵀα, raw
  GateParamMatrix beta_clamped;      // Sᵀα clamped to [0, π]
  double f_star = 0.0;               // Tr(SᵀAS) / Tr(SᵀBS)
  double chi = 0.0;                  // Tr(Sᵀ Δα Δαᵀ S)
  double tau = 0.0;                  // Σ_rs ω_rs ‖Δφ_r − Δφ_s‖²
  double omega = 0.0;                // Tr(Sᵀ Δα η Δαᵀ S), unregularized
  double epsilon = 0.0;              // ridge added to B before the solve
  double zeta = 0.0;                 // scale actually used
  bool orthogonalized = false;
  bool reduced = false;              // m < L
  bool degenerate_input = false;     // Δα = 0
  std::size_t rank = 0;              // numerical rank of Δα
};

/// Column r is θ*_r − θ*_{r+1}.
inline Matrix build_differences(const GateParamMatrix& alpha) {
  require(alpha.runs() >= 2, ErrorCode::TooFewRuns, "need at least 2 runs to form differences");
  const std::size_t gates = alpha.gates();
  Matrix d(gates, alpha.runs() - 1);
  for (std::size_t r = 0; r + 1 < alpha.runs(); ++r)
    for (std::size_t l = 0; l < gates; ++l) d(l, r) = alpha(l, r) - alpha(l, r + 1);
  return d;
}

inline double squared_column_distance(const Matrix& m, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double d = m(i, a) - m(i, b);
    s += d * d;
  }
  return s;
}

/// Mean of the nonzero pairwise squared distances between difference
/// columns; 1 when every pair coincides.
inline double auto_zeta(const Matrix& delta) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < delta.cols(); ++r)
    for (std::size_t s = r + 1; s < delta.cols(); ++s) {
      const double d2 = squared_column_distance(delta, r, s);
      if (d2 > 0.0) {
        sum += d2;
        ++count;
      }
    }
  return count > 0 ? sum / static_cast<double>(count) : 1.0;
}

/// ω_rs = exp(−‖Δ_r − Δ_s‖²/ζ) for |r − s| ≤ κ, else 0. The window is applied
/// symmetrically so W is symmetric.
inline WeightGraph build_weights(const Matrix& delta, std::size_t kappa, double zeta, double c) {
  require(kappa >= 1, ErrorCode::InvalidArgument, "kappa must be >= 1");
  require(zeta > 0.0 && std::isfinite(zeta), ErrorCode::InvalidArgument, "zeta must be > 0");
  require(c >= 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "c must be >= 0");
  const std::size_t n = delta.cols();
  WeightGraph g;
  g.kappa = kappa;
  g.zeta = zeta;
  g.c = c;
  g.w = Matrix(n, n);
  g.eta = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t s = r; s < n && s - r <= kappa; ++s) {
      const double omega = std::exp(-squared_column_distance(delta, r, s) / zeta);
      g.w(r, s) = omega;
      g.w(s, r) = omega;
    }
  for (std::size_t r = 0; r < n; ++r) {
    double rowsum = 0.0;
    for (std::size_t s = 0; s < n; ++s) rowsum += g.w(r, s);
    g.eta(r, r) = rowsum;
  }
  g.sigma = Matrix::identity(n) + c * (g.eta - g.w);
  return g;
}

/// Σ_{r,s} ω_rs ‖x_r − x_s‖² over the columns of x (full double sum).
inline double weighted_pair_spread(const Matrix& w, const Matrix& x) {
  require(w.rows() == x.cols() && w.is_square(), ErrorCode::DimensionMismatch, "weighted_pair_spread");
  double total = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t s = 0; s < w.cols(); ++s)
      if (w(r, s) != 0.0) total += w(r, s) * squared_column_distance(x, r, s);
  return total;
}

/// Tr(Sᵀ M S).
inline double projected_trace(const Matrix& s, const Matrix& m) { return (s.transpose() * m * s).trace(); }

namespace detail {

// Solves A s = λ B s with B = B_raw + εI when Δα has rank k < L. On the null
// space of Δαᵀ both A and B_raw vanish, so those L − k eigenpairs are exactly
// λ = 0 with vectors n/√ε; only the k-dimensional range problem goes through
// the reduction. Solving the full problem instead leaves roundoff of A divided
// by ε in place of the zeros.
inline GenEigResult solve_on_range(const Matrix& a, const Matrix& b, const Matrix& delta, double epsilon,
                                   std::size_t& rank) {
  const std::size_t gates = a.rows();
  Matrix gram = delta * delta.transpose();
  gram.symmetrize();
  const GenEigResult basis = sym_eig(gram);
  const double top = basis.eigenvalues.back();
  std::vector<std::size_t> range_cols;
  std::vector<std::size_t> null_cols;
  for (std::size_t k = 0; k < gates; ++k)
    (basis.eigenvalues[k] > 1e-12 * top ? range_cols : null_cols).push_back(k);
  rank = range_cols.size();
  if (null_cols.empty()) return gen_sym_eig(a, b);

  Matrix q(gates, rank);
  for (std::size_t j = 0; j < rank; ++j) q.set_column(j, basis.eigenvectors.column(range_cols[j]));
  const Matrix qt = q.transpose();
  Matrix a_range = qt * a * q;
  Matrix b_range = qt * b * q;
  a_range.symmetrize();
  b_range.symmetrize();
  const GenEigResult reduced = gen_sym_eig(a_range, b_range);
  const Matrix lifted = q * reduced.eigenvectors;

  Matrix vectors(gates, gates);
  Matrix values(gates, gates);
  const double scale = 1.0 / std::sqrt(epsilon);
  for (std::size_t j = 0; j < null_cols.size(); ++j) {
    auto v = basis.eigenvectors.column(null_cols[j]);
    for (double& x : v) x *= scale;
    vectors.set_column(j, v);
  }
  for (std::size_t j = 0; j < rank; ++j) {
    vectors.set_column(null_cols.size() + j, lifted.column(j));
    values(null_cols.size() + j, null_cols.size() + j) = reduced.eigenvalues[j];
  }
  GenEigResult out = sorted_result(values, vectors);
  canonicalize_signs(out.eigenvectors);
  out.b_normalized = true;
  return out;
}

}  // namespace detail

inline StabilizerSolution solve_stabilizer(const GateParamMatrix& alpha, const StabilizerParams& params = {}) {
  require(alpha.runs() >= 3, ErrorCode::TooFewRuns, "stabilization needs R >= 3 runs");
  const std::size_t gates = alpha.gates();
  const std::size_t m = params.m.value_or(gates);
  require(m >= 1 && m <= gates, ErrorCode::InvalidArgument, "retain count m must lie in [1, L]");

  const Matrix delta = build_differences(alpha);
  StabilizerSolution sol;
  sol.zeta = params.zeta.value_or(auto_zeta(delta));
  const WeightGraph graph = build_weights(delta, params.kappa, sol.zeta, params.c);

  const Matrix delta_t = delta.transpose();
  Matrix a = delta * graph.sigma * delta_t;
  Matrix b_raw = delta * graph.eta * delta_t;
  a.symmetrize();
  b_raw.symmetrize();

  Matrix b = b_raw;
  GenEigResult eig;
  if (delta.max_abs() == 0.0) {
    sol.degenerate_input = true;
    eig = sym_eig(b_raw);
    b = Matrix::identity(gates);
  } else {
    sol.epsilon = 1e-10 * b_raw.trace() / static_cast<double>(gates);
    for (std::size_t i = 0; i < gates; ++i) b(i, i) += sol.epsilon;
    eig = detail::solve_on_range(a, b, delta, sol.epsilon, sol.rank);
  }

  sol.eigenvalues = eig.eigenvalues;
  sol.s = eig.eigenvectors.leading_columns(m);
  if (params.orthogonalize) {
    sol.s = polar_factor(sol.s);
    sol.orthogonalized = true;
  }
  sol.reduced = m < gates;

  const Matrix st = sol.s.transpose();
  sol.beta = GateParamMatrix(st * alpha.matrix());
  sol.beta_clamped = sol.beta.clamped();

  const double denom = projected_trace(sol.s, b);
  sol.f_star = sol.degenerate_input ? 0.0 : projected_trace(sol.s, a) / denom;
  sol.chi = projected_trace(sol.s, delta * delta_t);
  sol.omega = projected_trace(sol.s, b_raw);
  sol.tau = weighted_pair_spread(graph.w, st * delta);
  return sol;
}

/// |f(φ_r) − f(θ*_r)| per run. Requires a full-rank β (m = L).
inline std::vector<double> stabilized_objective_gap(const PauliCircuit& circuit, const StateVector& input,
                                                    const GateParamMatrix& beta, const GateParamMatrix& alpha) {
  require(beta.gates() == alpha.gates() && beta.runs() == alpha.runs(), ErrorCode::DimensionMismatch,
          "beta and alpha shapes differ (reduced beta has no objective gap)");
  require(alpha.gates() == circuit.gates(), ErrorCode::DimensionMismatch, "alpha rows vs circuit gates");
  std::vector<double> gap(alpha.runs());
  for (std::size_t r = 0; r < alpha.runs(); ++r)
    gap[r] = std::abs(evaluate_objective(circuit, beta.run(r), input) -
                      evaluate_objective(circuit, alpha.run(r), input));
  return gap;
}

}  // namespace qstab
