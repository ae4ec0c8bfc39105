#pragma once

#include <span>
#include <string>
#include <vector>

#include "fquant/cubature.hpp"
#include "fquant/diffusion.hpp"
#include "fquant/rng.hpp"

namespace fquant {

// Risk-neutral Heston dynamics
//   dS = S (r dt + sqrt(v) dW1),  dv = k (a - v) dt + theta sqrt(v) dW2,
//   d<W1, W2> = rho dt.
struct HestonParams {
  double s0 = 100.0;
  double r = 0.1;
  double k = 2.0;
  double a = 0.01;
  double theta = 0.2;
  double rho = 0.5;
  double v0 = 0.1;
  double T = 1.0;

  void validate() const;
};

// Named parameter sets: "paper-2007" (s0=100, theta=0.2, strikes 99..111) and
// "paper-2007-fig" (s0=50, theta=0.1, strikes 44..56).
HestonParams heston_preset(const std::string& name);
std::vector<double> preset_strikes(const std::string& name);

// Discounted Asian forward e^{-rT} E (1/T int S dt) = s0 (1 - e^{-rT})/(rT).
double asian_forward_discounted(const HestonParams& p);

enum class PriceMethod { FQ, FQ_Romberg, FQ_Interpolated, MC };

struct PriceVector {
  std::vector<double> strikes;
  std::vector<double> prices;
  PriceMethod method = PriceMethod::FQ;
  int N = 0, M = 0, n_steps = 0;
  double runtime_sec = 0.0;
  std::vector<double> std_errors;  // MC only

  void validate() const;  // prices >= 0 and non-increasing in strike
};

// Time-averaged quantized asset values on the product cells, the core object
// behind every strike: avg[i*M + j] = (1/T) int_0^T s_{i,j}(t) dt.
struct AssetCellAverages {
  int N = 0, M = 0, n_steps = 0;
  std::vector<double> avg;
  std::vector<double> wx, wy;      // marginal weights
  double quantized_forward = 0.0;  // e^{-rT} sum w_i w_j avg_{ij}
};

AssetCellAverages quantized_asset_averages(const HestonParams& p,
                                           const FunctionalQuantizer& fqW1,
                                           const FunctionalQuantizer& fqW2, int n);

// Full asset path of one product cell (diagnostics and tests).
std::vector<double> quantized_asset_path(const HestonParams& p, const FunctionalQuantizer& fqW1,
                                         const FunctionalQuantizer& fqW2, int i, int j, int n);

struct AsianFqResult {
  std::vector<double> strikes, calls, puts;
  double quantized_forward = 0.0;
  double quant_error = 0.0;  // of the W1 quantizer; feeds the InvSqError weighting
  int N = 0, M = 0, n_steps = 0;
  double runtime_sec = 0.0;
};

// Crude quantized premium: e^{-rT} sum_{ij} w_i w_j (avg_{ij} - K)^+ (and the
// matching puts from the same cells).
AsianFqResult price_asian_fq(const HestonParams& p, std::span<const double> strikes,
                             const FunctionalQuantizer& fqW1, const FunctionalQuantizer& fqW2,
                             int n);
AsianFqResult price_asian_fq(const HestonParams& p, std::span<const double> strikes,
                             const AssetCellAverages& cells);

// Two-budget log-Romberg extrapolation in space, then the anchor-strike
// scheme: at K_max the extrapolated call is used directly (deep OTM), at
// K_min the call is recovered from the extrapolated put by parity (deep ITM),
// and in between the two estimates are blended linearly in K.
PriceVector price_asian_interpolated(const HestonParams& p, std::span<const double> strikes,
                                     const AsianFqResult& coarse, const AsianFqResult& fine,
                                     RombergMode mode = RombergMode::LogN);

// Monte Carlo reference: full-truncation Euler on (log S, v) with antithetic
// drivers and a time-Romberg extrapolation 2 P(2n) - P(n) on coupled grids.
PriceVector mc_reference(const HestonParams& p, std::span<const double> strikes,
                         std::uint64_t paths, int n_euler, RngStream rng);

}  // namespace fquant
