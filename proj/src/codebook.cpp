#include "fquant/codebook.hpp"

#include <limits>
#include <stdexcept>

namespace fquant {

double CovNorm::trace() const {
  double s = 0.0;
  for (double l : lambdas) s += l;
  return s;
}

void CovNorm::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("CovNorm: empty");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0)) throw std::invalid_argument("CovNorm: lambdas must be positive");
    if (k > 0 && lambdas[k] > lambdas[k - 1])
      throw std::invalid_argument("CovNorm: lambdas must be non-increasing");
  }
}

double weighted_dist2(std::span<const double> lambdas, const double* a, const double* b) {
  double s = 0.0;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const double d = a[k] - b[k];
    s += lambdas[k] * d * d;
  }
  return s;
}

int nearest_index(const Codebook& cb, std::span<const double> z) {
  if (static_cast<int>(z.size()) != cb.dim)
    throw std::invalid_argument("nearest_index: dimension mismatch");
  const int n = cb.size();
  const auto& lam = cb.norm.lambdas;
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < n; ++i) {
    const double* p = cb.row(i);
    double s = 0.0;
    int k = 0;
    for (; k < cb.dim; ++k) {
      const double d = z[k] - p[k];
      s += lam[k] * d * d;
      if (s >= best) break;  // partial sums only grow
    }
    if (k == cb.dim && s < best) {
      best = s;
      best_i = i;
    }
  }
  return best_i;
}

}  // namespace fquant
