#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace fquant {

// Composite Simpson rule over a uniform grid with step h.
// values.size() must be odd (an even number of panels).
inline double simpson(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson: needs an odd number of points");
  double s = values[0] + values[n - 1];
  double four = 0.0, two = 0.0;
  for (std::size_t j = 1; j + 1 < n; j += 2) four += values[j];
  for (std::size_t j = 2; j + 1 < n; j += 2) two += values[j];
  return h / 3.0 * (s + 4.0 * four + 2.0 * two);
}

// Running integral I[j] = int_{t0}^{tj} f dt on a uniform grid: Simpson pairs
// at even indices, a half-panel quadratic rule to reach odd indices. Fourth
// order on smooth integrands.
inline std::vector<double> running_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  for (std::size_t j = 1; j < n; ++j) {
    if (j % 2 == 0) {
      out[j] = out[j - 2] + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
    } else if (j + 1 < n) {
      out[j] = out[j - 1] + h / 12.0 * (5.0 * f[j - 1] + 8.0 * f[j] - f[j + 1]);
    } else {
      out[j] = out[j - 1] + h / 12.0 * (-f[j - 2] + 8.0 * f[j - 1] + 5.0 * f[j]);
    }
  }
  return out;
}

}  // namespace fquant
