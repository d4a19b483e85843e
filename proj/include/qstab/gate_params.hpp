#pragma once

#include <algorithm>
#include <cstddef>
#include <numbers>
#include <vector>

#include "qstab/error.hpp"
#include "qstab/numerics/matrix.hpp"

namespace qstab {

/// L×R matrix of gate parameters in radians: entry (l, r) is the parameter of
/// unitary l in run r, so each column is one run's parameter vector.
class GateParamMatrix {
 public:
  GateParamMatrix() = default;
  GateParamMatrix(std::size_t gates, std::size_t runs, double fill = 0.0) : values_(gates, runs, fill) {}
  explicit GateParamMatrix(Matrix values) : values_(std::move(values)) {
    require(values_.all_finite(), ErrorCode::InvalidArgument, "gate parameters must be finite");
  }

  [[nodiscard]] std::size_t gates() const noexcept { return values_.rows(); }
  [[nodiscard]] std::size_t runs() const noexcept { return values_.cols(); }

  double& operator()(std::size_t l, std::size_t r) noexcept { return values_(l, r); }
  double operator()(std::size_t l, std::size_t r) const noexcept { return values_(l, r); }

  [[nodiscard]] std::vector<double> run(std::size_t r) const {
    require(r < runs(), ErrorCode::IndexOutOfRange, "run index");
    return values_.column(r);
  }

  [[nodiscard]] const Matrix& matrix() const noexcept { return values_; }

  [[nodiscard]] bool within_gate_range() const {
    const auto d = values_.data();
    return std::all_of(d.begin(), d.end(), [](double v) { return v >= 0.0 && v <= std::numbers::pi; });
  }

  /// Copy with every entry clamped to [0, π].
  [[nodiscard]] GateParamMatrix clamped() const {
    GateParamMatrix out = *this;
    for (double& v : out.values_.data()) v = std::clamp(v, 0.0, std::numbers::pi);
    return out;
  }

  friend bool operator==(const GateParamMatrix&, const GateParamMatrix&) = default;

 private:
  Matrix values_;
};

}  // namespace qstab
