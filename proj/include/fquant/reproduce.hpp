#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fquant/kl_basis.hpp"

namespace fquant {

struct ProductTableRow {
  std::uint64_t budget = 0;
  std::uint64_t n_rec = 0;
  double error = 0.0;
  std::vector<int> sizes;
};

// Optimal product-quantizer table for the Brownian motion on [0,1]: scalar
// error table up to M = 64, then the exact allocation search per budget.
std::vector<ProductTableRow> reproduce_product_table(std::span<const std::uint64_t> budgets);

struct ConstantPoint {
  int N = 0;
  int d = 0;
  double log_n_e2 = 0.0;  // log N * squared full quantization error
};

// log N * e_N(W)^2 series across splitting levels, one optimization run per
// critical-dimension band so every level is solved in its own d(N).
std::vector<ConstantPoint> reproduce_optimal_constant(int n_max, const OptSchedule& schedule,
                                                      RngStream rng);

}  // namespace fquant
