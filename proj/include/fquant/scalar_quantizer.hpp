#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fquant {

enum class ScalarLaw { StdNormal, Uniform };

// Quadratic quantizer of a one-dimensional law. Cells are the midpoint
// intervals of the sorted codewords (outer boundaries at the support edges,
// +/-inf for the normal law).
struct ScalarQuantizer {
  ScalarLaw law = ScalarLaw::StdNormal;
  double a = 0.0;  // Uniform(a,b) support, unused for StdNormal
  double b = 0.0;
  std::vector<double> points;   // strictly increasing
  std::vector<double> weights;  // cell probabilities, sum to 1
  double distortion = 0.0;      // squared L2 quantization error
  int iterations = 0;
  double residual = 0.0;  // final sup-norm stationarity residual

  int size() const { return static_cast<int>(points.size()); }
  // M+1 midpoint boundaries; for StdNormal the outer two are +/-inf.
  std::vector<double> cell_bounds() const;
};

struct ConvergenceError : std::runtime_error {
  double last_residual;
  ConvergenceError(const std::string& msg, double r) : std::runtime_error(msg), last_residual(r) {}
};

// The unique stationary M-quantizer of N(0,1). Newton zero-search on the
// distortion gradient seeded at the quantiles Phi^{-1}((2i-1)/2M); converges
// when the sup-norm stationarity residual drops below tol.
ScalarQuantizer optimal_normal_quantizer(int M, double tol = 1e-12);

// Closed form for Uniform(a,b): points a + (2k-1)(b-a)/(2M), uniform weights,
// distortion (b-a)^2 / (12 M^2).
ScalarQuantizer optimal_uniform_quantizer(double a, double b, int M);

// Lloyd I fixed point with closed-form normal cell moments from an arbitrary
// increasing start grid. Stops at the stationarity tolerance or after
// max_iters sweeps.
std::vector<double> lloyd_normal_fixed_point(std::vector<double> points, double tol,
                                             int max_iters, int* iters_out = nullptr);

// Squared quantization errors e^2_M of N(0,1) for M = 1..max_M (entry [0]
// unused, set to the variance so e^2_1 = 1 chains naturally).
std::vector<double> scalar_error_table(int max_M = 64, double tol = 1e-12);

}  // namespace fquant
