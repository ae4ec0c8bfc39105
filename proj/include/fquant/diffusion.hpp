#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "fquant/ensemble.hpp"
#include "fquant/kl_basis.hpp"

namespace fquant {

// Scalar diffusion dX = b(t,X) dt + theta(t,X) dW. The quantized dynamics
// integrate the corrected ODE
//   dx = (b - 1/2 theta dtheta/dx) dt + theta dw_i(t)
// along each codeword path, whose time derivative is analytic.
struct ScalarDiffusionSpec {
  std::function<double(double, double)> drift;         // b(t, x)
  std::function<double(double, double)> diffusion;     // theta(t, x)
  std::function<double(double, double)> diffusion_dx;  // d theta / dx
  double x0 = 0.0;
};

struct SolverError : std::runtime_error {
  int codeword;
  double time;
  SolverError(const std::string& msg, int cw, double t)
      : std::runtime_error(msg), codeword(cw), time(t) {}
};

// Classical RK4 with fixed step T/n per codeword; weights pass through from
// the driving Brownian quantizer.
QuantizedPathEnsemble quantize_scalar_diffusion(const ScalarDiffusionSpec& spec,
                                                const FunctionalQuantizer& fqW, int n);

// Closed-form quantized Ornstein-Uhlenbeck path dx = -k x dt + vol dw:
//   x(t) = e^{-kt} x0 + vol sum_l chi_l c_l phi_l(t)
// with c_l = T^2 / ((pi(l-1/2))^2 + (kT)^2) and chi the codeword's normalized
// (unit-variance) coordinates.
std::vector<double> ou_closed_form(double k, double vol, double x0,
                                   std::span<const double> chi, double T,
                                   std::span<const double> tgrid);

struct HestonVolParams {
  double k = 0.0;      // mean reversion speed
  double a = 0.0;      // long-run level
  double theta = 0.0;  // vol of vol
  double v0 = 0.0;
  double y_max = 0.0;  // guard band; 0 = automatic
};

struct VolQuantization {
  QuantizedPathEnsemble ensemble;          // y paths, N x (n+1)
  std::vector<double> running_integral;    // ybar(t) = int_0^t y ds, same shape
  const double* ybar(int i) const {
    return running_integral.data() + static_cast<std::size_t>(i) * ensemble.grid_size();
  }
};

// Squared-volatility codeword system dy = k(a - y - theta^2/(4k)) dt
// + theta sqrt(max(y,0)) dw_i(t), with the running integrals accumulated by
// Simpson on the same grid.
VolQuantization heston_vol_quantizer(const HestonVolParams& p, const FunctionalQuantizer& fqW2,
                                     int n);

// Running integral int_0^t g(y(s)) w'(s) ds, the codeword derivative taken
// analytically from its coefficient row.
std::vector<double> quantized_stochastic_integral(const std::function<double(double)>& g,
                                                  std::span<const double> ypath,
                                                  const KLSystem& sys,
                                                  std::span<const double> coeff_row,
                                                  std::span<const double> tgrid);

}  // namespace fquant
