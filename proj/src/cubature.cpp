#include "fquant/cubature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fquant/quadrature.hpp"

namespace fquant {

CubatureResult cubature(const QuantizedPathEnsemble& e, const Functional& F,
                        double quant_error, bool stationary) {
  if (!F.evaluator) throw std::invalid_argument("cubature: functional has no evaluator");
  const int N = e.size();
  const std::size_t L = e.tgrid.size();
  CubatureResult out;
  double v = 0.0;
  for (int i = 0; i < N; ++i) {
    const double fi = F.evaluator(e.tgrid, std::span<const double>(e.path(i), L));
    if (!std::isfinite(fi))
      throw std::runtime_error("cubature: non-finite functional value at codeword " +
                               std::to_string(i));
    v += e.weights[i] * fi;
  }
  out.value = v;
  if (quant_error > 0.0) {
    if (stationary && F.dlipschitz_bound)
      out.error_bound = *F.dlipschitz_bound * quant_error * quant_error;
    else if (F.lipschitz_bound)
      out.error_bound = *F.lipschitz_bound * quant_error;
  }
  return out;
}

CubatureResult cubature(const FunctionalQuantizer& fq, const Functional& F, int grid_points) {
  if (grid_points < 3 || grid_points % 2 == 0)
    throw std::invalid_argument("cubature: grid_points must be odd and >= 3");
  const auto tgrid = uniform_grid(fq.system.T, grid_points - 1);
  const auto e = synthesize_paths(fq, tgrid);
  // Both product and optimized quantizers here are stationary by construction.
  return cubature(e, F, fq.quant_error, true);
}

ConditionalCubature conditional_cubature(
    const QuantizedPathEnsemble& X, const QuantizedPathEnsemble& Y,
    const std::function<double(std::span<const double>, std::span<const double>,
                               std::span<const double>, std::span<const double>)>& F,
    const std::vector<double>* joint_weights) {
  const int nx = X.size(), ny = Y.size();
  const std::size_t lx = X.tgrid.size(), ly = Y.tgrid.size();
  if (joint_weights && static_cast<int>(joint_weights->size()) != nx * ny)
    throw std::invalid_argument("conditional_cubature: joint weight shape mismatch");

  ConditionalCubature out;
  out.values.resize(ny);
  for (int j = 0; j < ny; ++j) {
    double num = 0.0, mass = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double w = joint_weights ? (*joint_weights)[static_cast<std::size_t>(i) * ny + j]
                                     : X.weights[i] * Y.weights[j];
      if (w == 0.0) continue;
      num += w * F(X.tgrid, std::span<const double>(X.path(i), lx),
                   Y.tgrid, std::span<const double>(Y.path(j), ly));
      mass += w;
    }
    if (mass > 0.0) out.values[j] = num / mass;
  }
  return out;
}

double romberg_log_extrapolate(const RombergPoint& p1, const RombergPoint& p2,
                               RombergMode mode) {
  double a1, a2;
  if (mode == RombergMode::LogN) {
    if (!(p1.n > 1.0 && p2.n > 1.0))
      throw std::invalid_argument("romberg_log_extrapolate: levels must exceed 1");
    a1 = std::log(p1.n);
    a2 = std::log(p2.n);
  } else {
    if (!(p1.quant_error > 0.0 && p2.quant_error > 0.0))
      throw std::invalid_argument("romberg_log_extrapolate: quant errors required");
    a1 = 1.0 / (p1.quant_error * p1.quant_error);
    a2 = 1.0 / (p2.quant_error * p2.quant_error);
  }
  if (a1 == a2) throw std::invalid_argument("romberg_log_extrapolate: equal abscissae");
  return (a2 * p2.value - a1 * p1.value) / (a2 - a1);
}

Functional functional_integral() {
  Functional F;
  F.evaluator = [](std::span<const double> t, std::span<const double> v) {
    return simpson(v, t[1] - t[0]);
  };
  F.lipschitz_bound = 1.0;  // |int (w - w')| <= sqrt(T) |w - w'|_2, and T = 1 by scaling
  return F;
}

Functional functional_squared_integral() {
  Functional F;
  F.evaluator = [](std::span<const double> t, std::span<const double> v) {
    double h = t[1] - t[0];
    std::vector<double> sq(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) sq[j] = v[j] * v[j];
    return simpson(sq, h);
  };
  F.dlipschitz_bound = 2.0;
  return F;
}

Functional functional_sup() {
  Functional F;
  F.evaluator = [](std::span<const double>, std::span<const double> v) {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    return m;
  };
  return F;
}

Functional functional_asian_bs(double s0, double r, double sigma, double K, double T) {
  Functional F;
  F.evaluator = [=](std::span<const double> t, std::span<const double> v) {
    const double h = t[1] - t[0];
    std::vector<double> s(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      s[j] = s0 * std::exp(sigma * v[j] + (r - 0.5 * sigma * sigma) * t[j]);
    const double avg = simpson(s, h) / T;
    return std::exp(-r * T) * std::max(avg - K, 0.0);
  };
  return F;
}

}  // namespace fquant
