#pragma once

#include <functional>
#include <optional>
#include <span>

#include "fquant/ensemble.hpp"
#include "fquant/kl_basis.hpp"

namespace fquant {

// Deterministic map from a discretized path to a real. The optional bounds
// feed the reported (never enforced) cubature error bounds: a Lipschitz
// constant w.r.t. the L2 path norm, and/or a Lipschitz constant of the
// differential for smooth functionals on stationary quantizers.
struct Functional {
  std::function<double(std::span<const double>, std::span<const double>)> evaluator;
  std::optional<double> lipschitz_bound;
  std::optional<double> dlipschitz_bound;
};

struct CubatureResult {
  double value = 0.0;
  std::optional<double> error_bound;
};

// Weighted sum of the functional over the ensemble. quant_error (if known)
// produces the error bound; `stationary` unlocks the second-order bound.
CubatureResult cubature(const QuantizedPathEnsemble& e, const Functional& F,
                        double quant_error = 0.0, bool stationary = false);

// Convenience: synthesize the quantizer on a uniform grid first. grid_points
// must be odd so Simpson-based functionals apply directly.
CubatureResult cubature(const FunctionalQuantizer& fq, const Functional& F,
                        int grid_points = 257);

struct ConditionalCubature {
  // One entry per Y-cell; empty optional flags a zero-mass cell.
  std::vector<std::optional<double>> values;
};

// E(F(X) | Y-cell j) over a pair of ensembles. joint_weights (row-major
// |X| x |Y|) defaults to the independent product of the marginal weights.
ConditionalCubature conditional_cubature(
    const QuantizedPathEnsemble& X, const QuantizedPathEnsemble& Y,
    const std::function<double(std::span<const double>, std::span<const double>,
                               std::span<const double>, std::span<const double>)>& F,
    const std::vector<double>* joint_weights = nullptr);

struct RombergPoint {
  double n = 0.0;           // quantization level
  double value = 0.0;
  double quant_error = 0.0; // only needed for the InvSqError weighting
};

enum class RombergMode { LogN, InvSqError };

// Two-point extrapolation in 1/log N (or 1/quant_error^{-2}): eliminates the
// leading bias term, exact on inputs affine in the reciprocal abscissa.
double romberg_log_extrapolate(const RombergPoint& p1, const RombergPoint& p2,
                               RombergMode mode = RombergMode::LogN);

// Built-in path functionals (uniform grids; integrals by Simpson).
Functional functional_integral();
Functional functional_squared_integral();
Functional functional_sup();
Functional functional_asian_bs(double s0, double r, double sigma, double K, double T);

}  // namespace fquant
