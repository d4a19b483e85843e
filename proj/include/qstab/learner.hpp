#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qstab/error.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/numerics/matrix.hpp"
#include "qstab/rng.hpp"

// Unsupervised pass over random gate parameters, projected through a
// stabilizer S. Dimensions follow the only consistent reading of the
// projection formulas: samples have length L, z_j = SᵀX_j ∈ ℝ^m, and
// b_j = −z_jᵀ(Sᵀ·mean) is a scalar per sample.

namespace qstab {

struct TrainingSet {
  std::vector<std::vector<double>> samples;  // q samples of length L, entries in [0, π]
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return samples.empty() ? 0 : samples.front().size(); }
};

struct Projection {
  std::vector<std::vector<double>> z;  // q vectors of length m
  std::vector<double> b;               // q scalars
};

struct RunOutputs {
  std::vector<double> y_tilde;  // length L
  std::vector<double> delta_y;  // length L−1
};

struct LearnerOutput {
  Projection projection;
  std::vector<RunOutputs> runs;
};

inline TrainingSet build_training_set(std::size_t gates, std::size_t q, std::uint64_t seed) {
  require(q >= 2, ErrorCode::InvalidArgument, "training set needs q >= 2 samples");
  require(gates >= 1, ErrorCode::InvalidArgument, "training set needs L >= 1");
  TrainingSet ts;
  ts.seed = seed;
  ts.samples.resize(q, std::vector<double>(gates));
  for (std::size_t j = 0; j < q; ++j) {
    auto eng = substream(seed, "learner/training", j);
    for (double& v : ts.samples[j]) v = uniform(eng, 0.0, std::numbers::pi);
  }
  return ts;
}

inline Projection project_training(const TrainingSet& ts, const Matrix& s) {
  require(ts.size() >= 1, ErrorCode::InvalidArgument, "empty training set");
  require(s.rows() == ts.dimension(), ErrorCode::DimensionMismatch, "S rows must equal sample length L");
  const std::size_t gates = s.rows();
  const Matrix st = s.transpose();

  std::vector<double> mean(gates, 0.0);
  for (const auto& x : ts.samples)
    for (std::size_t i = 0; i < gates; ++i) mean[i] += x[i];
  for (double& v : mean) v /= static_cast<double>(ts.size());
  const std::vector<double> projected_mean = st * std::span<const double>(mean);

  Projection p;
  p.z.reserve(ts.size());
  p.b.reserve(ts.size());
  for (const auto& x : ts.samples) {
    p.z.push_back(st * std::span<const double>(x));
    p.b.push_back(-dot(p.z.back(), projected_mean));
  }
  return p;
}

/// ỹ_i = (1/q) Σ_j ‖θ*_{r,i}·z_j + b_j·𝟙‖₂ and Δỹ_i = |ỹ_i − ỹ_{i+1}| for run r (0-based).
inline RunOutputs learn_outputs(const Projection& p, const GateParamMatrix& alpha, std::size_t r) {
  require(r < alpha.runs(), ErrorCode::IndexOutOfRange, "run index " + std::to_string(r));
  require(!p.z.empty() && p.z.size() == p.b.size(), ErrorCode::DimensionMismatch, "projection shape");
  const std::size_t gates = alpha.gates();
  const double q = static_cast<double>(p.z.size());
  RunOutputs out;
  out.y_tilde.assign(gates, 0.0);
  for (std::size_t i = 0; i < gates; ++i) {
    const double theta = alpha(i, r);
    double acc = 0.0;
    for (std::size_t j = 0; j < p.z.size(); ++j) {
      double sq = 0.0;
      for (double zc : p.z[j]) {
        const double y = theta * zc + p.b[j];
        sq += y * y;
      }
      acc += std::sqrt(sq);
    }
    out.y_tilde[i] = acc / q;
  }
  out.delta_y.resize(gates > 0 ? gates - 1 : 0);
  for (std::size_t i = 0; i + 1 < gates; ++i) out.delta_y[i] = std::abs(out.y_tilde[i] - out.y_tilde[i + 1]);
  return out;
}

inline LearnerOutput learn_all(const TrainingSet& ts, const Matrix& s, const GateParamMatrix& alpha) {
  require(alpha.gates() == s.rows(), ErrorCode::DimensionMismatch, "alpha rows vs S rows");
  LearnerOutput out;
  out.projection = project_training(ts, s);
  out.runs.reserve(alpha.runs());
  for (std::size_t r = 0; r < alpha.runs(); ++r) out.runs.push_back(learn_outputs(out.projection, alpha, r));
  return out;
}

}  // namespace qstab
