#include "fquant/heston.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "fquant/parallel.hpp"
#include "fquant/quadrature.hpp"

namespace fquant {

namespace {
double now_sec() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void check_driver(const HestonParams& p, const FunctionalQuantizer& fq, const char* which) {
  if (fq.system.process != GaussianProcess::BrownianMotion)
    throw std::invalid_argument(std::string("heston: ") + which + " must quantize Brownian motion");
  if (std::abs(fq.system.T - p.T) > 1e-12 * std::max(1.0, p.T))
    throw std::invalid_argument(std::string("heston: ") + which + " horizon mismatch");
}
}  // namespace

void HestonParams::validate() const {
  if (!(s0 > 0.0)) throw std::invalid_argument("HestonParams: s0 > 0 required");
  if (!(T > 0.0)) throw std::invalid_argument("HestonParams: T > 0 required");
  if (!(rho >= -1.0 && rho <= 1.0)) throw std::invalid_argument("HestonParams: |rho| <= 1 required");
  if (theta == 0.0) {
    if (v0 < 0.0) throw std::invalid_argument("HestonParams: v0 >= 0 required");
    return;
  }
  if (!(v0 > 0.0)) throw std::invalid_argument("HestonParams: v0 > 0 required");
  if (!(theta * theta / (4.0 * a * k) < 1.0))
    throw std::invalid_argument("HestonParams: theta^2/(4ak) < 1 required");
}

HestonParams heston_preset(const std::string& name) {
  HestonParams p;
  p.r = 0.1;
  p.k = 2.0;
  p.a = 0.01;
  p.rho = 0.5;
  p.v0 = 0.1;
  p.T = 1.0;
  if (name == "paper-2007") {
    p.s0 = 100.0;
    p.theta = 0.2;
  } else if (name == "paper-2007-fig") {
    p.s0 = 50.0;
    p.theta = 0.1;
  } else {
    throw std::invalid_argument("heston_preset: unknown preset '" + name + "'");
  }
  return p;
}

std::vector<double> preset_strikes(const std::string& name) {
  double lo, hi;
  if (name == "paper-2007") {
    lo = 99.0;
    hi = 111.0;
  } else if (name == "paper-2007-fig") {
    lo = 44.0;
    hi = 56.0;
  } else {
    throw std::invalid_argument("preset_strikes: unknown preset '" + name + "'");
  }
  std::vector<double> ks;
  for (double K = lo; K <= hi + 1e-9; K += 1.0) ks.push_back(K);
  return ks;
}

double asian_forward_discounted(const HestonParams& p) {
  if (p.r == 0.0) return p.s0;
  return p.s0 * (1.0 - std::exp(-p.r * p.T)) / (p.r * p.T);
}

void PriceVector::validate() const {
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] >= 0.0)) throw std::runtime_error("PriceVector: negative price");
    if (i > 0 && strikes[i] > strikes[i - 1] && prices[i] > prices[i - 1] + 1e-10)
      throw std::runtime_error("PriceVector: call prices increase in strike");
  }
}

AssetCellAverages quantized_asset_averages(const HestonParams& p,
                                           const FunctionalQuantizer& fqW1,
                                           const FunctionalQuantizer& fqW2, int n) {
  p.validate();
  if (!(p.theta > 0.0))
    throw std::invalid_argument("quantized_asset_averages: theta > 0 required");
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument("quantized_asset_averages: even n >= 8 required");
  check_driver(p, fqW1, "W1 quantizer");
  check_driver(p, fqW2, "W2 quantizer");

  const int N = fqW1.size(), M = fqW2.size();
  const int L = n + 1;
  const double h = p.T / n;

  const VolQuantization vol = heston_vol_quantizer({p.k, p.a, p.theta, p.v0, 0.0}, fqW2, n);

  // Analytic codeword derivatives of the idiosyncratic driver, tabulated once.
  std::vector<double> wprime(static_cast<std::size_t>(N) * L);
  const auto tgrid = vol.ensemble.tgrid;
  parallel_chunks(N, default_chunk_count(), [&](int, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t i = b; i < e; ++i)
      for (int j = 0; j < L; ++j)
        wprime[i * L + j] = fqW1.path_derivative(static_cast<int>(i), tgrid[j]);
  });

  AssetCellAverages out;
  out.N = N;
  out.M = M;
  out.n_steps = n;
  out.wx = fqW1.weights;
  out.wy = fqW2.weights;
  out.avg.assign(static_cast<std::size_t>(N) * M, 0.0);

  const double drift_const = p.r - p.rho * p.a * p.k / p.theta;
  const double ybar_coef = p.rho * p.k / p.theta - 0.5;
  const double y_coef = p.rho / p.theta;
  const double ortho = std::sqrt(1.0 - p.rho * p.rho);

  parallel_chunks(M, default_chunk_count(), [&](int, std::uint64_t jb, std::uint64_t je) {
    std::vector<double> sqy(L), base(L), integrand(L), s(L);
    for (std::uint64_t j = jb; j < je; ++j) {
      const double* y = vol.ensemble.path(static_cast<int>(j));
      const double* ybar = vol.ybar(static_cast<int>(j));
      for (int t = 0; t < L; ++t) {
        sqy[t] = std::sqrt(std::max(y[t], 0.0));
        base[t] = drift_const * tgrid[t] + ybar_coef * ybar[t] + y_coef * (y[t] - p.v0);
      }
      for (int i = 0; i < N; ++i) {
        const double* wp = wprime.data() + static_cast<std::size_t>(i) * L;
        for (int t = 0; t < L; ++t) integrand[t] = sqy[t] * wp[t];
        const auto I = running_simpson(integrand, h);
        for (int t = 0; t < L; ++t) s[t] = p.s0 * std::exp(base[t] + ortho * I[t]);
        out.avg[static_cast<std::size_t>(i) * M + j] = simpson(s, h) / p.T;
      }
    }
  });

  double qf = 0.0;
  for (int i = 0; i < N; ++i) {
    double row = 0.0;
    const double* a = out.avg.data() + static_cast<std::size_t>(i) * M;
    for (int j = 0; j < M; ++j) row += out.wy[j] * a[j];
    qf += out.wx[i] * row;
  }
  out.quantized_forward = std::exp(-p.r * p.T) * qf;
  return out;
}

std::vector<double> quantized_asset_path(const HestonParams& p, const FunctionalQuantizer& fqW1,
                                         const FunctionalQuantizer& fqW2, int i, int j, int n) {
  p.validate();
  if (!(p.theta > 0.0)) throw std::invalid_argument("quantized_asset_path: theta > 0 required");
  check_driver(p, fqW1, "W1 quantizer");
  check_driver(p, fqW2, "W2 quantizer");
  const VolQuantization vol = heston_vol_quantizer({p.k, p.a, p.theta, p.v0, 0.0}, fqW2, n);
  const int L = n + 1;
  const double* y = vol.ensemble.path(j);
  const double* ybar = vol.ybar(j);
  const auto& tgrid = vol.ensemble.tgrid;

  std::vector<double> sqy(L);
  for (int t = 0; t < L; ++t) sqy[t] = std::sqrt(std::max(y[t], 0.0));
  const auto I = quantized_stochastic_integral([](double v) { return std::sqrt(std::max(v, 0.0)); },
                                               std::span<const double>(y, L), fqW1.system,
                                               std::span<const double>(fqW1.row(i), fqW1.dim),
                                               tgrid);
  std::vector<double> s(L);
  const double ortho = std::sqrt(1.0 - p.rho * p.rho);
  for (int t = 0; t < L; ++t) {
    const double base = (p.r - p.rho * p.a * p.k / p.theta) * tgrid[t] +
                        (p.rho * p.k / p.theta - 0.5) * ybar[t] +
                        (p.rho / p.theta) * (y[t] - p.v0);
    s[t] = p.s0 * std::exp(base + ortho * I[t]);
  }
  return s;
}

AsianFqResult price_asian_fq(const HestonParams& p, std::span<const double> strikes,
                             const AssetCellAverages& cells) {
  AsianFqResult out;
  out.strikes.assign(strikes.begin(), strikes.end());
  out.N = cells.N;
  out.M = cells.M;
  out.n_steps = cells.n_steps;
  out.quantized_forward = cells.quantized_forward;
  const std::size_t ks = strikes.size();
  std::vector<double> call(ks, 0.0), put(ks, 0.0);
  for (int i = 0; i < cells.N; ++i) {
    const double* a = cells.avg.data() + static_cast<std::size_t>(i) * cells.M;
    for (int j = 0; j < cells.M; ++j) {
      const double w = cells.wx[i] * cells.wy[j];
      for (std::size_t q = 0; q < ks; ++q) {
        const double d = a[j] - strikes[q];
        if (d > 0.0)
          call[q] += w * d;
        else
          put[q] -= w * d;
      }
    }
  }
  const double disc = std::exp(-p.r * p.T);
  out.calls.resize(ks);
  out.puts.resize(ks);
  for (std::size_t q = 0; q < ks; ++q) {
    out.calls[q] = disc * call[q];
    out.puts[q] = disc * put[q];
  }
  return out;
}

AsianFqResult price_asian_fq(const HestonParams& p, std::span<const double> strikes,
                             const FunctionalQuantizer& fqW1, const FunctionalQuantizer& fqW2,
                             int n) {
  const double t0 = now_sec();
  const auto cells = quantized_asset_averages(p, fqW1, fqW2, n);
  auto out = price_asian_fq(p, strikes, cells);
  out.quant_error = fqW1.quant_error;
  out.runtime_sec = now_sec() - t0;
  return out;
}

PriceVector price_asian_interpolated(const HestonParams& p, std::span<const double> strikes,
                                     const AsianFqResult& coarse, const AsianFqResult& fine,
                                     RombergMode mode) {
  if (strikes.empty()) throw std::invalid_argument("price_asian_interpolated: empty strikes");
  if (coarse.strikes.size() != strikes.size() || fine.strikes.size() != strikes.size())
    throw std::invalid_argument("price_asian_interpolated: strike grids disagree");
  for (std::size_t q = 1; q < strikes.size(); ++q)
    if (!(strikes[q] > strikes[q - 1]))
      throw std::invalid_argument("price_asian_interpolated: strikes must increase");

  const double k_min = strikes.front(), k_max = strikes.back();
  const double f_disc = asian_forward_discounted(p);
  const double disc = std::exp(-p.r * p.T);

  PriceVector out;
  out.method = PriceMethod::FQ_Interpolated;
  out.strikes.assign(strikes.begin(), strikes.end());
  out.prices.resize(strikes.size());
  out.N = fine.N;
  out.M = fine.M;
  out.n_steps = fine.n_steps;

  for (std::size_t q = 0; q < strikes.size(); ++q) {
    const double K = strikes[q];
    if (K < k_min || K > k_max)
      throw std::invalid_argument("price_asian_interpolated: strike outside anchors");
    const double c_dir =
        romberg_log_extrapolate({(double)coarse.N, coarse.calls[q], coarse.quant_error},
                                {(double)fine.N, fine.calls[q], fine.quant_error}, mode);
    const double p_ext =
        romberg_log_extrapolate({(double)coarse.N, coarse.puts[q], coarse.quant_error},
                                {(double)fine.N, fine.puts[q], fine.quant_error}, mode);
    const double c_par = p_ext + f_disc - K * disc;
    const double theta_k = k_max > k_min ? (K - k_min) / (k_max - k_min) : 0.5;
    out.prices[q] = std::max(0.0, (1.0 - theta_k) * c_par + theta_k * c_dir);
  }
  return out;
}

PriceVector mc_reference(const HestonParams& p, std::span<const double> strikes,
                         std::uint64_t paths, int n_euler, RngStream rng) {
  p.validate();
  if (n_euler < 2 || n_euler % 2 != 0)
    throw std::invalid_argument("mc_reference: even n_euler >= 2 required");
  const double t0 = now_sec();
  const std::uint64_t pairs = std::max<std::uint64_t>(1, paths / 2);
  const int nc = n_euler;       // coarse steps
  const int nf = 2 * n_euler;   // fine steps
  const double hf = p.T / nf, hc = p.T / nc;
  const double sqhf = std::sqrt(hf), sqhc = std::sqrt(hc);
  const double ortho = std::sqrt(1.0 - p.rho * p.rho);
  const std::size_t ks = strikes.size();
  const std::uint64_t stride = 2ULL * nf;  // gaussians per pair block

  const int n_chunks = default_chunk_count();
  std::vector<std::vector<double>> sums(n_chunks), sumsqs(n_chunks);

  parallel_chunks(pairs, n_chunks, [&](int c, std::uint64_t b, std::uint64_t e) {
    auto& sum = sums[c];
    auto& sumsq = sumsqs[c];
    sum.assign(ks, 0.0);
    sumsq.assign(ks, 0.0);
    std::vector<double> g(stride);
    std::vector<double> sf(nf + 1), sc(nc + 1);
    std::vector<double> pay(ks);

    for (std::uint64_t pr = b; pr < e; ++pr) {
      fill_gaussians(rng, pr * stride, g);
      std::fill(pay.begin(), pay.end(), 0.0);
      for (int anti = 0; anti < 2; ++anti) {
        const double sign = anti == 0 ? 1.0 : -1.0;
        // fine trajectory
        double v = p.v0, ls = 0.0;
        sf[0] = p.s0;
        for (int j = 0; j < nf; ++j) {
          const double zv = sign * g[2 * j];
          const double zs = sign * g[2 * j + 1];
          const double z1 = p.rho * zv + ortho * zs;
          const double vp = std::max(v, 0.0);
          const double sq = std::sqrt(vp);
          ls += (p.r - 0.5 * vp) * hf + sq * sqhf * z1;
          v += p.k * (p.a - vp) * hf + p.theta * sq * sqhf * zv;
          sf[j + 1] = p.s0 * std::exp(ls);
        }
        // coarse trajectory from the same increments
        v = p.v0;
        ls = 0.0;
        sc[0] = p.s0;
        const double half = std::sqrt(0.5);
        for (int j = 0; j < nc; ++j) {
          const double zv = sign * half * (g[4 * j] + g[4 * j + 2]);
          const double zs = sign * half * (g[4 * j + 1] + g[4 * j + 3]);
          const double z1 = p.rho * zv + ortho * zs;
          const double vp = std::max(v, 0.0);
          const double sq = std::sqrt(vp);
          ls += (p.r - 0.5 * vp) * hc + sq * sqhc * z1;
          v += p.k * (p.a - vp) * hc + p.theta * sq * sqhc * zv;
          sc[j + 1] = p.s0 * std::exp(ls);
        }
        const double avg_f = simpson(sf, hf) / p.T;
        const double avg_c = simpson(sc, hc) / p.T;
        for (std::size_t q = 0; q < ks; ++q) {
          const double x = 2.0 * std::max(avg_f - strikes[q], 0.0) -
                           std::max(avg_c - strikes[q], 0.0);
          pay[q] += 0.5 * x;
        }
      }
      for (std::size_t q = 0; q < ks; ++q) {
        sum[q] += pay[q];
        sumsq[q] += pay[q] * pay[q];
      }
    }
  });

  PriceVector out;
  out.method = PriceMethod::MC;
  out.strikes.assign(strikes.begin(), strikes.end());
  out.prices.resize(ks);
  out.std_errors.resize(ks);
  out.n_steps = nf;
  const double disc = std::exp(-p.r * p.T);
  for (std::size_t q = 0; q < ks; ++q) {
    double s = 0.0, s2 = 0.0;
    for (int c = 0; c < n_chunks; ++c) {
      if (sums[c].empty()) continue;
      s += sums[c][q];
      s2 += sumsqs[c][q];
    }
    const double mean = s / static_cast<double>(pairs);
    const double var = std::max(0.0, s2 / static_cast<double>(pairs) - mean * mean);
    out.prices[q] = disc * mean;
    out.std_errors[q] = disc * std::sqrt(var / static_cast<double>(pairs));
  }
  out.runtime_sec = now_sec() - t0;
  return out;
}

}  // namespace fquant
