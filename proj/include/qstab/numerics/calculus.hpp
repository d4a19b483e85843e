#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qstab/error.hpp"

namespace qstab {

/// Composite Simpson rule over [a, b] with an even number of panels.
/// No prefactor is applied; callers scale as needed.
template <typename F>
double integrate(F&& f, double a, double b, std::size_t panels) {
  require(a < b, ErrorCode::InvalidArgument, "integrate needs a < b");
  require(panels >= 2 && panels % 2 == 0, ErrorCode::InvalidArgument,
          "integrate needs an even panel count >= 2, got " + std::to_string(panels));
  const double h = (b - a) / static_cast<double>(panels);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t k = 1; k < panels; ++k) {
    const double x = a + h * static_cast<double>(k);
    if (k % 2 == 1)
      odd += f(x);
    else
      even += f(x);
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

/// Integral of uniformly spaced samples. Simpson on an even panel count; for
/// an odd count the last three panels use Simpson's 3/8 rule.
inline double integrate_samples(std::span<const double> y, double step) {
  require(y.size() >= 2, ErrorCode::DegenerateGrid, "integrate_samples needs >= 2 samples");
  require(step > 0.0, ErrorCode::DegenerateGrid, "integrate_samples needs step > 0");
  const std::size_t panels = y.size() - 1;
  if (panels == 1) return 0.5 * step * (y[0] + y[1]);

  auto simpson = [&](std::size_t first, std::size_t count) {
    double s = y[first] + y[first + count];
    for (std::size_t k = 1; k < count; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * y[first + k];
    return s * step / 3.0;
  };

  if (panels % 2 == 0) return simpson(0, panels);
  const std::size_t head = panels - 3;
  const std::size_t t = head;
  const double tail = 3.0 * step / 8.0 * (y[t] + 3.0 * y[t + 1] + 3.0 * y[t + 2] + y[t + 3]);
  return (head > 0 ? simpson(0, head) : 0.0) + tail;
}

/// Central differences in the interior, second-order one-sided differences
/// at both ends. Exact for polynomials of degree <= 2.
inline std::vector<double> differentiate(std::span<const double> samples, double step) {
  require(samples.size() >= 3, ErrorCode::DegenerateGrid, "differentiate needs >= 3 samples");
  require(step > 0.0, ErrorCode::DegenerateGrid, "differentiate needs step > 0");
  const std::size_t n = samples.size();
  std::vector<double> d(n);
  const double inv2h = 1.0 / (2.0 * step);
  d[0] = (3.0 * (samples[1] - samples[0]) - (samples[2] - samples[1])) * inv2h;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (samples[i + 1] - samples[i - 1]) * inv2h;
  d[n - 1] = (3.0 * (samples[n - 1] - samples[n - 2]) - (samples[n - 2] - samples[n - 3])) * inv2h;
  return d;
}

}  // namespace qstab
