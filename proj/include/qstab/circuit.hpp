#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qstab/error.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/rng.hpp"

// Toy state-vector simulator for a chain of Pauli rotations U_i(θ) = exp(-iθP_i).
// Qubit q corresponds to bit q of the basis index (little-endian), and letter q
// of a Pauli string acts on qubit q.

namespace qstab {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 16;

class PauliString;

class StateVector {
 public:
  StateVector() = default;

  /// Computational basis state |index⟩ on n qubits.
  static StateVector basis(std::size_t n, std::size_t index = 0) {
    require(n >= 1 && n <= kMaxQubits, ErrorCode::InvalidArgument, "qubit count out of range");
    require(index < (std::size_t{1} << n), ErrorCode::IndexOutOfRange, "basis index");
    StateVector s;
    s.n_ = n;
    s.amplitudes_.assign(std::size_t{1} << n, Complex{});
    s.amplitudes_[index] = 1.0;
    return s;
  }

  /// Takes amplitudes that are already normalized to within 1e-12.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    require(dim >= 2 && std::has_single_bit(dim), ErrorCode::DimensionMismatch,
            "amplitude count must be a power of two >= 2");
    StateVector s;
    s.n_ = static_cast<std::size_t>(std::countr_zero(dim));
    s.amplitudes_ = std::move(amplitudes);
    require(std::abs(s.norm_squared() - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
            "state is not normalized");
    return s;
  }

  /// Rescales arbitrary nonzero amplitudes to unit norm.
  static StateVector normalized(std::vector<Complex> amplitudes) {
    double ns = 0.0;
    for (const auto& a : amplitudes) ns += std::norm(a);
    require(ns > 0.0, ErrorCode::InvalidArgument, "zero state");
    const double inv = 1.0 / std::sqrt(ns);
    for (auto& a : amplitudes) a *= inv;
    return from_amplitudes(std::move(amplitudes));
  }

  [[nodiscard]] std::size_t qubits() const noexcept { return n_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return amplitudes_.size(); }
  [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }

  [[nodiscard]] double norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s;
  }

 private:
  friend StateVector apply_unitary(const StateVector&, const PauliString&, double);
  std::size_t n_ = 0;
  std::vector<Complex> amplitudes_;
};

class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(std::string_view letters) : letters_(letters) {
    require(!letters_.empty() && letters_.size() <= kMaxQubits, ErrorCode::InvalidArgument,
            "Pauli string length out of range");
    for (std::size_t q = 0; q < letters_.size(); ++q) {
      const char c = letters_[q];
      require(c == 'I' || c == 'X' || c == 'Y' || c == 'Z', ErrorCode::InvalidArgument,
              "Pauli letter must be one of I, X, Y, Z: " + std::string(letters));
      if (c == 'X' || c == 'Y') flip_mask_ |= std::uint64_t{1} << q;
      if (c == 'Z' || c == 'Y') sign_mask_ |= std::uint64_t{1} << q;
      if (c == 'Y') ++y_count_;
    }
  }

  [[nodiscard]] std::size_t qubits() const noexcept { return letters_.size(); }
  [[nodiscard]] const std::string& letters() const noexcept { return letters_; }

  /// P|b⟩ = phase(b)·|b ⊕ flip_mask⟩ with phase = i^{#Y}·(-1)^{popcount(b & sign_mask)}.
  [[nodiscard]] std::uint64_t flip_mask() const noexcept { return flip_mask_; }
  [[nodiscard]] Complex phase(std::uint64_t basis_index) const noexcept {
    static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex base = kIPow[y_count_ % 4];
    return (std::popcount(basis_index & sign_mask_) % 2 == 0) ? base : -base;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) { return a.letters_ == b.letters_; }

 private:
  std::string letters_;
  std::uint64_t flip_mask_ = 0;
  std::uint64_t sign_mask_ = 0;
  std::size_t y_count_ = 0;
};

/// L Pauli generators applied in order, plus a diagonal objective operator C
/// given by its values on the 2ⁿ computational basis states.
struct PauliCircuit {
  std::size_t n = 0;
  std::vector<PauliString> paulis;
  std::vector<double> objective;

  [[nodiscard]] std::size_t gates() const noexcept { return paulis.size(); }

  void validate() const {
    require(n >= 1 && n <= kMaxQubits, ErrorCode::InvalidArgument, "qubit count out of range");
    require(!paulis.empty(), ErrorCode::InvalidArgument, "circuit needs at least one gate");
    for (const auto& p : paulis)
      require(p.qubits() == n, ErrorCode::DimensionMismatch,
              "Pauli string " + p.letters() + " does not act on " + std::to_string(n) + " qubits");
    require(objective.size() == (std::size_t{1} << n), ErrorCode::DimensionMismatch,
            "objective must have 2^n entries");
    require(std::all_of(objective.begin(), objective.end(), [](double v) { return std::isfinite(v); }),
            ErrorCode::InvalidArgument, "objective entries must be finite");
  }
};

/// Number of cut edges for each basis state.
inline std::vector<double> maxcut_objective(std::size_t n,
                                            std::span<const std::pair<std::size_t, std::size_t>> edges) {
  require(n >= 1 && n <= kMaxQubits, ErrorCode::InvalidArgument, "qubit count out of range");
  std::vector<double> values(std::size_t{1} << n, 0.0);
  for (const auto& [i, j] : edges)
    require(i < n && j < n && i != j, ErrorCode::InvalidArgument, "maxcut edge out of range");
  for (std::size_t b = 0; b < values.size(); ++b)
    for (const auto& [i, j] : edges) values[b] += (((b >> i) ^ (b >> j)) & 1U) ? 1.0 : 0.0;
  return values;
}

/// exp(-iθP)|ψ⟩ = cos θ·|ψ⟩ - i·sin θ·P|ψ⟩, exact since P² = I.
inline StateVector apply_unitary(const StateVector& state, const PauliString& p, double theta) {
  require(state.qubits() == p.qubits(), ErrorCode::DimensionMismatch,
          "state and Pauli string act on different qubit counts");
  require(std::isfinite(theta), ErrorCode::InvalidArgument, "theta must be finite");
  const double c = std::cos(theta);
  const Complex minus_i_sin{0.0, -std::sin(theta)};
  StateVector out = state;
  const auto in = state.amplitudes();
  for (std::size_t b = 0; b < in.size(); ++b) {
    const std::size_t target = b ^ static_cast<std::size_t>(p.flip_mask());
    out.amplitudes_[target] = c * in[target] + minus_i_sin * p.phase(b) * in[b];
  }
  return out;
}

/// U_L(θ_L)…U_1(θ_1)|input⟩.
inline StateVector prepare_state(const PauliCircuit& circuit, std::span<const double> theta,
                                 const StateVector& input) {
  require(theta.size() == circuit.gates(), ErrorCode::DimensionMismatch,
          "theta has " + std::to_string(theta.size()) + " entries, circuit has " +
              std::to_string(circuit.gates()) + " gates");
  require(input.qubits() == circuit.n, ErrorCode::DimensionMismatch, "input state qubit count");
  StateVector s = input;
  for (std::size_t i = 0; i < theta.size(); ++i) s = apply_unitary(s, circuit.paulis[i], theta[i]);
  return s;
}

/// f(θ) = ⟨θ|C|θ⟩ for the diagonal objective C.
inline double evaluate_objective(const PauliCircuit& circuit, std::span<const double> theta,
                                 const StateVector& input) {
  require(circuit.objective.size() == (std::size_t{1} << circuit.n), ErrorCode::DimensionMismatch,
          "objective size");
  const StateVector s = prepare_state(circuit, theta, input);
  double f = 0.0;
  const auto amps = s.amplitudes();
  for (std::size_t b = 0; b < amps.size(); ++b) f += circuit.objective[b] * std::norm(amps[b]);
  return f;
}

/// Central finite-difference gradient of evaluate_objective.
inline std::vector<double> objective_gradient(const PauliCircuit& circuit, std::span<const double> theta,
                                              const StateVector& input, double step = 1e-4) {
  std::vector<double> grad(theta.size());
  std::vector<double> probe(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + step;
    const double up = evaluate_objective(circuit, probe, input);
    probe[i] = theta[i] - step;
    const double down = evaluate_objective(circuit, probe, input);
    probe[i] = theta[i];
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

struct RunConfig {
  std::size_t runs = 10;         // R
  double noise_scale = 0.05;     // radians
  std::size_t ascent_steps = 50;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    require(runs >= 2, ErrorCode::InvalidArgument, "run count R must be >= 2");
    require(noise_scale >= 0.0 && std::isfinite(noise_scale), ErrorCode::InvalidArgument,
            "noise_scale must be >= 0");
    require(std::isfinite(learning_rate), ErrorCode::InvalidArgument, "learning_rate must be finite");
  }
};

/// Per-run optimal gate parameters. A seeded start θ ∈ [0, π]^L is improved by
/// projected finite-difference gradient ascent, then each run r adds its own
/// Gaussian perturbation drawn from substream (seed, r) and clamps to [0, π].
inline GateParamMatrix generate_alpha(const PauliCircuit& circuit, const StateVector& input,
                                      const RunConfig& config) {
  circuit.validate();
  config.validate();
  const std::size_t gates = circuit.gates();
  constexpr double pi = std::numbers::pi;

  auto init = substream(config.seed, "circuit/init");
  std::vector<double> theta(gates);
  for (double& t : theta) t = uniform(init, 0.0, pi);

  for (std::size_t step = 0; step < config.ascent_steps; ++step) {
    const auto grad = objective_gradient(circuit, theta, input);
    for (std::size_t i = 0; i < gates; ++i)
      theta[i] = std::clamp(theta[i] + config.learning_rate * grad[i], 0.0, pi);
  }

  GateParamMatrix alpha(gates, config.runs);
  for (std::size_t r = 0; r < config.runs; ++r) {
    auto eng = substream(config.seed, "circuit/noise", r);
    for (std::size_t i = 0; i < gates; ++i) {
      const double noise = config.noise_scale > 0.0 ? config.noise_scale * standard_normal(eng) : 0.0;
      alpha(i, r) = std::clamp(theta[i] + noise, 0.0, pi);
    }
  }
  return alpha;
}

/// f(θ*_r) for every column of a parameter matrix.
inline std::vector<double> per_run_objective(const PauliCircuit& circuit, const StateVector& input,
                                             const GateParamMatrix& params) {
  std::vector<double> out(params.runs());
  for (std::size_t r = 0; r < params.runs(); ++r) out[r] = evaluate_objective(circuit, params.run(r), input);
  return out;
}

}  // namespace qstab
