#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qstab/error.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/numerics/calculus.hpp"

namespace qstab {

// ---------------------------------------------------------------------------
// Generalized relative entropy between β and a target β*
// ---------------------------------------------------------------------------

/// β and its target β*, same shape, every entry strictly positive.
struct TargetPair {
  GateParamMatrix beta;
  GateParamMatrix beta_star;

  void validate() const {
    require(beta.gates() == beta_star.gates() && beta.runs() == beta_star.runs(), ErrorCode::DimensionMismatch,
            "beta and beta_star shapes differ");
    require(beta.runs() >= 1, ErrorCode::InvalidArgument, "empty target pair");
    for (std::size_t r = 0; r < beta.runs(); ++r)
      for (std::size_t l = 0; l < beta.gates(); ++l)
        require(beta(l, r) > 0.0 && beta_star(l, r) > 0.0, ErrorCode::NonPositiveEntry,
                "entry (" + std::to_string(l) + ", " + std::to_string(r) + ") is not positive");
  }
};

/// Σ_l (β log(β/β*) + β* − β) at run r (0-based).
inline double per_run_entropy(const TargetPair& pair, std::size_t r) {
  pair.validate();
  require(r < pair.beta.runs(), ErrorCode::IndexOutOfRange, "run index " + std::to_string(r));
  double total = 0.0;
  for (std::size_t l = 0; l < pair.beta.gates(); ++l) {
    const double x = pair.beta(l, r);
    const double y = pair.beta_star(l, r);
    total += x * std::log(x / y) + y - x;
  }
  return total;
}

/// f_D(r) for every run.
inline std::vector<double> entropy_curve(const TargetPair& pair) {
  pair.validate();
  std::vector<double> out(pair.beta.runs());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = per_run_entropy(pair, r);
  return out;
}

inline double relative_entropy(const TargetPair& pair) {
  double total = 0.0;
  for (double v : entropy_curve(pair)) total += v;
  return total;
}

// ---------------------------------------------------------------------------
// Oscillation stability δ
// ---------------------------------------------------------------------------

/// Integration window in run units.
struct RunWindow {
  double first = 1.0;
  double last = 10.0;
};

/// [1, 1 + R]: one full run-span starting at r₀ = 1. A sinusoid with N whole
/// oscillations over R completes them exactly on this window.
inline RunWindow full_span_window(double runs) { return {1.0, 1.0 + runs}; }

/// [1, R]: the run indices themselves.
inline RunWindow run_index_window(double runs) { return {1.0, runs}; }

struct DeltaStability {
  double mean_sq_derivative = 0.0;  // Δ = (1/R) ∫ ∂² dr
  double delta = 0.0;               // ((R/2π)·√Δ)⁻¹, meaningless if unbounded
  bool unbounded = false;           // Δ = 0: the curve does not move at all
};

/// δ from samples of f_D on a uniform grid spanning `window`. The derivative is
/// taken numerically and Δ is integrated with Simpson's rule.
inline DeltaStability delta_stability(std::span<const double> samples, RunWindow window, double runs) {
  require(samples.size() >= 8, ErrorCode::DegenerateGrid, "delta_stability needs >= 8 samples");
  require(window.last > window.first, ErrorCode::DegenerateGrid, "empty integration window");
  require(runs > 0.0, ErrorCode::InvalidArgument, "R must be > 0");
  const double step = (window.last - window.first) / static_cast<double>(samples.size() - 1);
  std::vector<double> d = differentiate(samples, step);
  for (double& v : d) v *= v;
  DeltaStability out;
  out.mean_sq_derivative = integrate_samples(d, step) / runs;
  if (out.mean_sq_derivative <= 0.0) {
    out.unbounded = true;
    out.delta = std::numeric_limits<double>::infinity();
    return out;
  }
  out.delta = 1.0 / (runs / (2.0 * std::numbers::pi) * std::sqrt(out.mean_sq_derivative));
  return out;
}

/// Samples f on `points` uniformly spaced nodes covering `window`.
template <typename F>
std::vector<double> sample_window(F&& f, RunWindow window, std::size_t points) {
  require(points >= 2, ErrorCode::DegenerateGrid, "need >= 2 sample points");
  std::vector<double> out(points);
  const double step = (window.last - window.first) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = f(window.first + step * static_cast<double>(i));
  return out;
}

/// Square root of 2: the amplitude for which the sinusoid's δ equals 1/N.
inline constexpr double kUnitDeltaAmplitude = std::numbers::sqrt2;

/// f_D(r) = amp·sin(2πN r/R) + mean, oscillating between gamma and lambda_max.
struct SinusoidModel {
  double runs = 10.0;   // R
  double oscillations = 1.0;  // N
  double gamma = 0.0;
  double lambda_max = 0.0;
  double amp = 0.0;
  double mean = 0.0;

  /// Range-parameterized model: amp = (λ_max − γ)/2, mean = amp + γ, with
  /// 0 ≤ γ ≤ λ_max ≤ 1.
  static SinusoidModel from_range(double runs, double oscillations, double gamma, double lambda_max) {
    require(runs > 0.0 && oscillations > 0.0, ErrorCode::InvalidArgument, "R and N must be > 0");
    require(0.0 <= gamma && gamma <= lambda_max && lambda_max <= 1.0, ErrorCode::InvalidArgument,
            "need 0 <= gamma <= lambda_max <= 1");
    SinusoidModel m;
    m.runs = runs;
    m.oscillations = oscillations;
    m.gamma = gamma;
    m.lambda_max = lambda_max;
    m.amp = 0.5 * (lambda_max - gamma);
    m.mean = m.amp + gamma;
    return m;
  }

  /// Amplitude-parameterized model; gamma = mean − amp and lambda_max = mean + amp
  /// are not confined to [0, 1] here.
  static SinusoidModel with_amplitude(double runs, double oscillations, double amp, double mean) {
    require(runs > 0.0 && oscillations > 0.0, ErrorCode::InvalidArgument, "R and N must be > 0");
    require(amp >= 0.0, ErrorCode::InvalidArgument, "amplitude must be >= 0");
    SinusoidModel m;
    m.runs = runs;
    m.oscillations = oscillations;
    m.amp = amp;
    m.mean = mean;
    m.gamma = mean - amp;
    m.lambda_max = mean + amp;
    return m;
  }
};

inline double sinusoid_f(const SinusoidModel& model, double r) {
  return model.amp * std::sin(2.0 * std::numbers::pi * model.oscillations * r / model.runs) + model.mean;
}

// ---------------------------------------------------------------------------
// Gate-parameter correlation μ
// ---------------------------------------------------------------------------

/// f(r) = X·cos²(2πCN r/R) with X = 2C²N²4π²/R².
struct CosSqModel {
  double runs = 10.0;
  double oscillations = 1.0;
  double c = 0.1;
  double x = 0.0;

  static CosSqModel make(double runs, double oscillations, double c) {
    require(runs > 0.0 && oscillations > 0.0, ErrorCode::InvalidArgument, "R and N must be > 0");
    require(c > 0.0, ErrorCode::InvalidArgument, "C must be > 0");
    const double pi = std::numbers::pi;
    return {runs, oscillations, c, 2.0 * c * c * oscillations * oscillations * 4.0 * pi * pi / (runs * runs)};
  }
};

inline double cos_sq_f(const CosSqModel& model, double r) {
  const double v = std::cos(2.0 * std::numbers::pi * model.c * model.oscillations * r / model.runs);
  return model.x * v * v;
}

inline constexpr std::size_t kDefaultPanels = 10000;

/// Absolute correlation of two run-indexed curves under F(h) = mean of h over
/// `window`, every F evaluated by composite Simpson quadrature. Because F(1) = 1
/// the result is invariant under f → a·f + b.
template <typename F, typename G>
double correlation_mu(F&& f, G&& g, RunWindow window, std::size_t panels = kDefaultPanels) {
  require(panels >= 100 && panels % 2 == 0, ErrorCode::InvalidArgument, "panels must be even and >= 100");
  require(window.last > window.first, ErrorCode::InvalidArgument, "empty integration window");
  const double length = window.last - window.first;
  auto functional = [&](auto&& h) { return integrate(h, window.first, window.last, panels) / length; };
  const double mean_f = functional(f);
  const double mean_g = functional(g);
  const double var_f = functional([&](double r) {
    const double d = f(r) - mean_f;
    return d * d;
  });
  const double var_g = functional([&](double r) {
    const double d = g(r) - mean_g;
    return d * d;
  });
  require(var_f >= 1e-14 && var_g >= 1e-14, ErrorCode::ZeroVariance, "a curve has (near) zero variance");
  const double cov = functional([&](double r) { return (f(r) - mean_f) * (g(r) - mean_g); });
  return std::abs(cov / std::sqrt(var_f * var_g));
}

/// μ over the full run span [1, 1 + R], where F(h) = (1/R)∫h dr.
template <typename F, typename G>
double correlation_mu(F&& f, G&& g, double runs, std::size_t panels = kDefaultPanels) {
  require(runs > 0.0, ErrorCode::InvalidArgument, "R must be > 0");
  return correlation_mu(std::forward<F>(f), std::forward<G>(g), full_span_window(runs), panels);
}

/// Closed-form μ for two cos² models with constants C and C*, evaluated as
/// published. Singular at C = C*.
inline double mu_closed_form(double c, double c_star, double oscillations, double runs) {
  require(c > 0.0 && c_star > 0.0, ErrorCode::InvalidArgument, "C and C* must be > 0");
  require(std::abs(c - c_star) >= 1e-9, ErrorCode::SingularParameters, "C and C* coincide");
  const double pi = std::numbers::pi;
  const double n = oscillations;
  const double r4 = runs * runs * runs * runs;
  const double numer = 2.0 * pi * pi * pi * c * c * c_star * c_star * n * n * n *
                       ((c_star - c) * std::sin(n * 4.0 * pi * (c_star + c)) +
                        (c_star + c) * std::sin(n * 4.0 * pi * (c_star - c)));
  auto centered_second_moment = [&](double k) { return k * k * k * k * n * n * n * n * 8.0 * pi * pi * pi * pi / r4; };
  const double denom =
      (c_star * c_star - c * c) * r4 * std::sqrt(centered_second_moment(c) * centered_second_moment(c_star));
  return std::abs(numer / denom);
}

}  // namespace qstab
