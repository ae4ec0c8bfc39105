#include "fquant/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fquant/parallel.hpp"
#include "fquant/quadrature.hpp"

namespace fquant {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

// RK4 over [0, T] with step h for dx = f(t, x, w'(t)) dt; w' evaluated at the
// half step as well, which keeps the classical fourth order for this
// time-dependent right-hand side.
template <typename Rhs, typename WPrime>
void rk4_path(double x0, double T, int n, const Rhs& f, const WPrime& wp, double* out,
              int codeword) {
  const double h = T / n;
  double x = x0;
  out[0] = x;
  for (int j = 0; j < n; ++j) {
    const double t = h * j;
    const double w0 = wp(t), wh = wp(t + 0.5 * h), w1 = wp(t + h);
    const double k1 = f(t, x, w0);
    const double k2 = f(t + 0.5 * h, x + 0.5 * h * k1, wh);
    const double k3 = f(t + 0.5 * h, x + 0.5 * h * k2, wh);
    const double k4 = f(t + h, x + h * k3, w1);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(x))
      throw SolverError("quantized diffusion: solver blew up at codeword " +
                            std::to_string(codeword) + ", t = " + std::to_string(t + h),
                        codeword, t + h);
    out[j + 1] = x;
  }
}
}  // namespace

QuantizedPathEnsemble quantize_scalar_diffusion(const ScalarDiffusionSpec& spec,
                                                const FunctionalQuantizer& fqW, int n) {
  if (n < 8) throw std::invalid_argument("quantize_scalar_diffusion: n >= 8 required");
  const int N = fqW.size();
  const double T = fqW.system.T;

  QuantizedPathEnsemble e;
  e.tgrid = uniform_grid(T, n);
  e.weights = fqW.weights;
  e.paths.resize(static_cast<std::size_t>(N) * (n + 1));
  e.provenance = "diffusion:" + fqW.mode;

  std::exception_ptr err;
  std::mutex err_mu;
  parallel_chunks(N, default_chunk_count(), [&](int, std::uint64_t b, std::uint64_t eIdx) {
    try {
      for (std::uint64_t i = b; i < eIdx; ++i) {
        const int cw = static_cast<int>(i);
        auto rhs = [&](double t, double x, double wprime) {
          const double th = spec.diffusion(t, x);
          return spec.drift(t, x) - 0.5 * th * spec.diffusion_dx(t, x) + th * wprime;
        };
        auto wp = [&](double t) { return fqW.path_derivative(cw, t); };
        rk4_path(spec.x0, T, n, rhs, wp, e.path(cw), cw);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  return e;
}

std::vector<double> ou_closed_form(double k, double vol, double x0, std::span<const double> chi,
                                   double T, std::span<const double> tgrid) {
  if (!(k > 0.0)) throw std::invalid_argument("ou_closed_form: k > 0 required");
  std::vector<double> out(tgrid.size());
  const double root = std::sqrt(2.0 / T);
  for (std::size_t j = 0; j < tgrid.size(); ++j) {
    const double t = tgrid[j];
    double s = 0.0;
    for (std::size_t l = 0; l < chi.size(); ++l) {
      const double a = kPi * (static_cast<double>(l) + 0.5) / T;
      const double c = 1.0 / (a * a + k * k);
      const double phi = root * (a * std::sin(a * t) + k * (std::cos(a * t) - std::exp(-k * t)));
      s += chi[l] * c * phi;
    }
    out[j] = std::exp(-k * t) * x0 + vol * s;
  }
  return out;
}

VolQuantization heston_vol_quantizer(const HestonVolParams& p, const FunctionalQuantizer& fqW2,
                                     int n) {
  if (!(p.v0 > 0.0)) throw std::invalid_argument("heston_vol_quantizer: v0 > 0 required");
  if (p.theta > 0.0 && !(p.theta * p.theta / (4.0 * p.a * p.k) < 1.0))
    throw std::invalid_argument("heston_vol_quantizer: theta^2/(4ak) < 1 required");
  const int N = fqW2.size();
  const double T = fqW2.system.T;
  const double y_max = p.y_max > 0.0 ? p.y_max : 1.0e4 * (p.a + p.v0);
  const double y_min = -10.0 * (p.a + p.v0);  // tiny negative excursions are fine, runaways not
  const double effective_level = p.a - p.theta * p.theta / (4.0 * p.k);

  VolQuantization vq;
  vq.ensemble.tgrid = uniform_grid(T, n);
  vq.ensemble.weights = fqW2.weights;
  vq.ensemble.paths.resize(static_cast<std::size_t>(N) * (n + 1));
  vq.ensemble.provenance = "heston-vol:" + fqW2.mode;
  vq.running_integral.resize(vq.ensemble.paths.size());

  std::exception_ptr err;
  std::mutex err_mu;
  const double h = T / n;
  parallel_chunks(N, default_chunk_count(), [&](int, std::uint64_t b, std::uint64_t eIdx) {
    try {
      for (std::uint64_t i = b; i < eIdx; ++i) {
        const int cw = static_cast<int>(i);
        auto rhs = [&](double /*t*/, double y, double wprime) {
          return p.k * (effective_level - y) + p.theta * std::sqrt(std::max(y, 0.0)) * wprime;
        };
        auto wp = [&](double t) { return fqW2.path_derivative(cw, t); };
        double* ypath = vq.ensemble.path(cw);
        rk4_path(p.v0, T, n, rhs, wp, ypath, cw);
        for (int j = 0; j <= n; ++j)
          if (ypath[j] < y_min || ypath[j] > y_max)
            throw SolverError("heston_vol_quantizer: path left the guard band at codeword " +
                                  std::to_string(cw) + ", t = " + std::to_string(j * h),
                              cw, j * h);
        const auto ybar = running_simpson(std::span<const double>(ypath, n + 1), h);
        std::copy(ybar.begin(), ybar.end(),
                  vq.running_integral.begin() + static_cast<std::size_t>(cw) * (n + 1));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  return vq;
}

std::vector<double> quantized_stochastic_integral(const std::function<double(double)>& g,
                                                  std::span<const double> ypath,
                                                  const KLSystem& sys,
                                                  std::span<const double> coeff_row,
                                                  std::span<const double> tgrid) {
  if (ypath.size() != tgrid.size())
    throw std::invalid_argument("quantized_stochastic_integral: grid mismatch");
  std::vector<double> integrand(tgrid.size());
  for (std::size_t j = 0; j < tgrid.size(); ++j) {
    double wp = 0.0;
    for (std::size_t l = 0; l < coeff_row.size(); ++l)
      wp += coeff_row[l] * sys.eigenfunction_derivative(static_cast<int>(l) + 1, tgrid[j]);
    integrand[j] = g(ypath[j]) * wp;
  }
  return running_simpson(integrand, tgrid[1] - tgrid[0]);
}

}  // namespace fquant
