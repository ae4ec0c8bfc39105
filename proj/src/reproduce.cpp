#include "fquant/reproduce.hpp"

#include <cmath>

namespace fquant {

std::vector<ProductTableRow> reproduce_product_table(std::span<const std::uint64_t> budgets) {
  const KLSystem sys{GaussianProcess::BrownianMotion, 1.0};
  const auto table = scalar_error_table(64);
  std::vector<ProductTableRow> rows;
  rows.reserve(budgets.size());
  for (std::uint64_t budget : budgets) {
    const auto alloc = optimal_allocation(budget, sys, table);
    rows.push_back({budget, alloc.n_rec(), alloc.quant_error, alloc.sizes});
  }
  return rows;
}

std::vector<ConstantPoint> reproduce_optimal_constant(int n_max, const OptSchedule& schedule,
                                                      RngStream rng) {
  const KLSystem sys{GaussianProcess::BrownianMotion, 1.0};
  std::vector<ConstantPoint> out;
  int d = 1;
  while (true) {
    // Levels whose working dimension is d: [e^d, e^{d+1}).
    const int band_lo = d == 1 ? 2 : static_cast<int>(std::ceil(std::exp(d)));
    const int band_hi = std::min(n_max, static_cast<int>(std::ceil(std::exp(d + 1))) - 1);
    if (band_lo > n_max) break;
    const double tail = sys.eigen_tail(d);
    const Codebook cb =
        optimize_pipeline(band_hi, sys.cov_norm(d), schedule, rng.derive(1000 + d));
    for (const auto& st : cb.meta.history) {
      if (st.size < band_lo || dimension_rule(st.size) != d) continue;
      out.push_back({st.size, d, std::log(st.size) * (st.distortion + tail)});
    }
    if (band_hi >= n_max) break;
    ++d;
  }
  return out;
}

}  // namespace fquant
