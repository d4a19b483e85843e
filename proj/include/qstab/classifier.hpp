#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qstab/error.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/rng.hpp"

// Stability-class assignment for stabilized sequences. Per-gate class
// probabilities are normalized Gaussian bumps around 1-D k-means centroids;
// each class k maps a sequence to the vector (ν(φ_i)·f_k(φ_i))_i, and classes
// are compared through a Gaussian kernel summed over gate positions.

namespace qstab {

enum class NuMode {
  Scaled,        // ν(φ) = φ/π
  Renormalized,  // ν(φ_i) = φ_i / Σ_j φ_j, sums to one over the sequence
};

struct ClassModel {
  std::vector<double> centroids;  // K values in [0, π], strictly increasing
  double bandwidth = 1.0;         // h
  double kernel_c = 0.02;         // 2σ² of the correlation kernel
  NuMode nu_mode = NuMode::Scaled;

  [[nodiscard]] std::size_t classes() const noexcept { return centroids.size(); }

  void validate() const {
    require(centroids.size() >= 2, ErrorCode::InvalidArgument, "class model needs K >= 2");
    for (std::size_t k = 1; k < centroids.size(); ++k)
      require(centroids[k] > centroids[k - 1], ErrorCode::InvalidArgument, "centroids must be strictly increasing");
    require(bandwidth > 0.0, ErrorCode::InvalidArgument, "bandwidth must be > 0");
    require(kernel_c > 0.0, ErrorCode::InvalidArgument, "kernel_c must be > 0");
  }
};

/// Primary class p with weight ξ, and the class q most kernel-correlated with
/// p with weight ℓ. Indices are 0-based.
struct ClassAssignment {
  std::size_t r = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  double xi = 0.0;
  double ell = 0.0;
  std::vector<double> scores;

  friend bool operator==(const ClassAssignment&, const ClassAssignment&) = default;
};

struct InnerProducts {
  double sigma_avg = 0.0;  // Σ_i (ν f_k)²
  double iota = 0.0;       // Σ_i ν² f_k f_l
};

inline constexpr double kDefaultKernelC = 2.0 * 0.1 * 0.1;

namespace detail {

inline void require_gate_range(std::span<const double> phi) {
  for (double v : phi)
    require(v >= 0.0 && v <= std::numbers::pi, ErrorCode::InvalidArgument,
            "gate parameter " + std::to_string(v) + " outside [0, pi]");
}

struct KMeansFit {
  std::vector<double> centroids;
  double inertia = std::numeric_limits<double>::infinity();
};

inline KMeansFit kmeans_1d(std::span<const double> x, std::size_t k, std::mt19937_64& eng) {
  const std::size_t n = x.size();
  std::vector<double> centers;
  centers.reserve(k);
  centers.push_back(x[std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform(eng, 0.0, 1.0) * n))]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) best = std::min(best, (x[i] - c) * (x[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) break;
    double target = uniform(eng, 0.0, total);
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      if (target < d2[i]) {
        pick = i;
        break;
      }
      target -= d2[i];
    }
    while (d2[pick] <= 0.0 && pick > 0) --pick;
    centers.push_back(x[pick]);
  }

  std::vector<std::size_t> label(n, 0);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < centers.size(); ++c)
        if (std::abs(x[i] - centers[c]) < std::abs(x[i] - centers[best])) best = c;
      if (iter == 0 || best != label[i]) changed = true;
      label[i] = best;
    }
    std::vector<double> sum(centers.size(), 0.0);
    std::vector<std::size_t> count(centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += x[i];
      ++count[label[i]];
    }
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (count[c] > 0) centers[c] = sum[c] / static_cast<double>(count[c]);
    if (!changed) break;
  }

  KMeansFit fit;
  fit.centroids = centers;
  fit.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) fit.inertia += (x[i] - centers[label[i]]) * (x[i] - centers[label[i]]);
  return fit;
}

}  // namespace detail

/// 1-D k-means (k-means++ seeding, best of 8 restarts) over every gate
/// parameter of β. Bandwidth h is half the largest centroid spacing.
inline ClassModel fit_classes(const GateParamMatrix& beta, std::size_t k, std::uint64_t seed,
                              double kernel_c = kDefaultKernelC, NuMode nu_mode = NuMode::Scaled) {
  require(k >= 2, ErrorCode::InvalidArgument, "K must be >= 2");
  const auto values = beta.matrix().data();
  detail::require_gate_range(values);

  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  require(distinct.size() >= 2, ErrorCode::DegenerateData, "all gate parameters are identical");
  require(distinct.size() >= k, ErrorCode::DegenerateData,
          "only " + std::to_string(distinct.size()) + " distinct parameters for K = " + std::to_string(k));

  detail::KMeansFit best;
  for (std::uint64_t restart = 0; restart < 8; ++restart) {
    auto eng = substream(seed, "classifier/kmeans", restart);
    detail::KMeansFit fit = detail::kmeans_1d(values, k, eng);
    if (fit.centroids.size() == k && fit.inertia < best.inertia) best = std::move(fit);
  }
  require(best.centroids.size() == k, ErrorCode::DegenerateData, "k-means could not place K centroids");
  std::sort(best.centroids.begin(), best.centroids.end());
  for (std::size_t i = 1; i < k; ++i)
    require(best.centroids[i] > best.centroids[i - 1], ErrorCode::DegenerateData, "centroids collapsed");

  ClassModel model;
  model.centroids = best.centroids;
  double spacing = 0.0;
  for (std::size_t i = 1; i < k; ++i) spacing = std::max(spacing, best.centroids[i] - best.centroids[i - 1]);
  model.bandwidth = spacing / 2.0;
  model.kernel_c = kernel_c;
  model.nu_mode = nu_mode;
  model.validate();
  return model;
}

/// f_k(φ) ∝ exp(−(φ − centroid_k)²/(2h²)), normalized over k.
inline std::vector<double> class_probabilities(const ClassModel& model, double phi) {
  const std::size_t k = model.classes();
  std::vector<double> logw(k);
  const double inv = 1.0 / (2.0 * model.bandwidth * model.bandwidth);
  for (std::size_t c = 0; c < k; ++c) logw[c] = -(phi - model.centroids[c]) * (phi - model.centroids[c]) * inv;
  const double top = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& w : logw) {
    w = std::exp(w - top);
    total += w;
  }
  for (double& w : logw) w /= total;
  return logw;
}

inline std::vector<double> nu_weights(const ClassModel& model, std::span<const double> phi) {
  std::vector<double> nu(phi.size());
  if (model.nu_mode == NuMode::Scaled) {
    for (std::size_t i = 0; i < phi.size(); ++i) nu[i] = phi[i] / std::numbers::pi;
  } else {
    double total = 0.0;
    for (double v : phi) total += v;
    for (std::size_t i = 0; i < phi.size(); ++i) nu[i] = total > 0.0 ? phi[i] / total : 0.0;
  }
  return nu;
}

/// Component i is ν(φ_i)·f_k(φ_i).
inline std::vector<double> phi_map(const ClassModel& model, std::span<const double> phi, std::size_t k) {
  require(k < model.classes(), ErrorCode::IndexOutOfRange, "class index");
  detail::require_gate_range(phi);
  const auto nu = nu_weights(model, phi);
  std::vector<double> out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = nu[i] * class_probabilities(model, phi[i])[k];
  return out;
}

/// Σ_i exp(−(φ_k,i − φ_l,i)²/kernel_c).
inline double rho(const ClassModel& model, std::span<const double> phi, std::size_t k, std::size_t l) {
  const auto a = phi_map(model, phi, k);
  const auto b = phi_map(model, phi, l);
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::exp(-(a[i] - b[i]) * (a[i] - b[i]) / model.kernel_c);
  return total;
}

inline InnerProducts inner_products(const ClassModel& model, std::span<const double> phi, std::size_t k,
                                    std::size_t l) {
  const auto a = phi_map(model, phi, k);
  const auto b = phi_map(model, phi, l);
  InnerProducts out;
  double bound = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.sigma_avg += a[i] * a[i];
    out.iota += a[i] * b[i];
    bound += a[i];
  }
  // Each factor lies in [0, 1], so the squared sum cannot exceed the plain sum.
  require(out.sigma_avg <= bound + 1e-12, ErrorCode::InvalidArgument, "sigma_avg exceeds its bound");
  return out;
}

/// scores_k = Σ_i φ_k,i; p = argmax scores, q = argmax_{l≠p} ρ(p, l). Ties go
/// to the smaller index.
inline ClassAssignment classify_sequence(const ClassModel& model, std::span<const double> phi) {
  model.validate();
  const std::size_t k = model.classes();
  ClassAssignment out;
  out.scores.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto mapped = phi_map(model, phi, c);
    double s = 0.0;
    for (double v : mapped) s += v;
    out.scores[c] = s;
  }
  out.p = 0;
  for (std::size_t c = 1; c < k; ++c)
    if (out.scores[c] > out.scores[out.p]) out.p = c;
  out.xi = out.scores[out.p];

  bool first = true;
  for (std::size_t l = 0; l < k; ++l) {
    if (l == out.p) continue;
    const double value = rho(model, phi, out.p, l);
    if (first || value > out.ell) {
      out.ell = value;
      out.q = l;
      first = false;
    }
  }
  return out;
}

inline std::vector<ClassAssignment> classify_all(const ClassModel& model, const GateParamMatrix& beta) {
  require(beta.runs() >= 1, ErrorCode::InvalidArgument, "no runs to classify");
  std::vector<ClassAssignment> out;
  out.reserve(beta.runs());
  for (std::size_t r = 0; r < beta.runs(); ++r) {
    out.push_back(classify_sequence(model, beta.run(r)));
    out.back().r = r;
  }
  return out;
}

}  // namespace qstab
