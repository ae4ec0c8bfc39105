#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fquant/codebook.hpp"
#include "fquant/ensemble.hpp"
#include "fquant/rng.hpp"
#include "fquant/scalar_quantizer.hpp"
#include "fquant/vq_optim.hpp"

namespace fquant {

enum class GaussianProcess { BrownianMotion, BrownianBridge };

// Karhunen-Loeve eigensystem of a named centered Gaussian process on [0, T].
//   Brownian motion:  lambda_n = (T / (pi (n - 1/2)))^2, e_n = sqrt(2/T) sin(pi (n-1/2) t / T)
//   Brownian bridge:  lambda_n = (T / (pi n))^2,         e_n = sqrt(2/T) sin(pi n t / T)
struct KLSystem {
  GaussianProcess process = GaussianProcess::BrownianMotion;
  double T = 1.0;

  double eigenvalue(int n) const;
  double eigenfunction(int n, double t) const;
  double eigenfunction_derivative(int n, double t) const;
  double total_trace() const;      // sum of all eigenvalues: T^2/2 (BM), T^2/6 (bridge)
  double eigen_tail(int d) const;  // sum_{n > d} lambda_n
  CovNorm cov_norm(int d) const;
};

// Working dimension of the optimization problem at level N: max(1, floor(log N)).
int dimension_rule(std::uint64_t N);

// Finite family of K-L coefficient rows synthesizing N weighted paths,
//   x_i(t) = sum_l coeffs[i,l] e_l(t),
// with the full quantization error (eigenvalue tail included).
struct FunctionalQuantizer {
  KLSystem system;
  int dim = 0;
  std::vector<double> coeffs;  // N x dim, row-major
  std::vector<double> weights;
  double quant_error = 0.0;        // full L2 error: sqrt(fin_dim_distortion + tail)
  double fin_dim_distortion = 0.0; // squared error of the coefficient quantizer
  std::string mode;                // "optimal" or "product"
  std::vector<int> allocation;     // product mode marginal sizes
  CodebookMeta meta;

  int size() const { return static_cast<int>(weights.size()); }
  const double* row(int i) const { return coeffs.data() + static_cast<std::size_t>(i) * dim; }
  double path_value(int i, double t) const;
  double path_derivative(int i, double t) const;
};

struct ProductAllocation {
  std::vector<int> sizes;  // non-increasing, entries >= 2; empty = single zero path
  double quant_error = 0.0;

  std::uint64_t n_rec() const;
};

// Exact squared error of the product quantizer with the given marginal sizes:
//   sum_n lambda_n (e^2_{N_n} - 1) + total_trace.
double product_error(std::span<const int> sizes, const KLSystem& sys,
                     std::span<const double> scalar_sq_errors);

// Exhaustive depth-first search over non-increasing size tuples with product
// <= budget, marginal sizes <= max_marginal, length <= max_length, pruned by
// the monotone tail bound.
ProductAllocation optimal_allocation(std::uint64_t n_budget, const KLSystem& sys,
                                     std::span<const double> scalar_sq_errors,
                                     int max_marginal = 64, int max_length = 12);

FunctionalQuantizer build_product_fq(const ProductAllocation& alloc, const KLSystem& sys,
                                     const std::vector<ScalarQuantizer>& marginals);
FunctionalQuantizer build_product_fq(std::uint64_t n_budget, const KLSystem& sys);

// Optimized quantizer: solves the finite-dimensional problem in dimension
// d(N) under the eigenvalue norm and rescales coordinates by sqrt(lambda).
FunctionalQuantizer build_optimal_fq(int N, const KLSystem& sys, const OptSchedule& schedule,
                                     RngStream rng);

// Sharp-rate constant of fractional Brownian motion quantization,
// c(H) = (Gamma(2H) sin(pi H) (1+2H) / pi)^{1/2} ((1+2H)/(2 pi))^H.
double fbm_rate_constant(double H);

QuantizedPathEnsemble synthesize_paths(const FunctionalQuantizer& fq,
                                       std::span<const double> tgrid);

}  // namespace fquant
