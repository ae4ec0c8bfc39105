#include "fquant/kl_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace fquant {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

double frequency(GaussianProcess p, double T, int n) {
  const double order = p == GaussianProcess::BrownianMotion ? n - 0.5 : static_cast<double>(n);
  return kPi * order / T;
}
}  // namespace

double KLSystem::eigenvalue(int n) const {
  if (n < 1) throw std::invalid_argument("KLSystem::eigenvalue: n >= 1 required");
  const double a = frequency(process, T, n);
  return 1.0 / (a * a);
}

double KLSystem::eigenfunction(int n, double t) const {
  return std::sqrt(2.0 / T) * std::sin(frequency(process, T, n) * t);
}

double KLSystem::eigenfunction_derivative(int n, double t) const {
  const double a = frequency(process, T, n);
  return std::sqrt(2.0 / T) * a * std::cos(a * t);
}

double KLSystem::total_trace() const {
  return process == GaussianProcess::BrownianMotion ? T * T / 2.0 : T * T / 6.0;
}

double KLSystem::eigen_tail(int d) const {
  if (d < 0) throw std::invalid_argument("KLSystem::eigen_tail: d >= 0 required");
  double head = 0.0;
  for (int n = 1; n <= d; ++n) head += eigenvalue(n);
  return total_trace() - head;
}

CovNorm KLSystem::cov_norm(int d) const {
  CovNorm norm;
  norm.lambdas.resize(d);
  for (int n = 1; n <= d; ++n) norm.lambdas[n - 1] = eigenvalue(n);
  return norm;
}

int dimension_rule(std::uint64_t N) {
  if (N < 1) throw std::invalid_argument("dimension_rule: N >= 1 required");
  const int d = static_cast<int>(std::floor(std::log(static_cast<double>(N))));
  return d < 1 ? 1 : d;
}

double FunctionalQuantizer::path_value(int i, double t) const {
  const double* c = row(i);
  double s = 0.0;
  for (int l = 0; l < dim; ++l) s += c[l] * system.eigenfunction(l + 1, t);
  return s;
}

double FunctionalQuantizer::path_derivative(int i, double t) const {
  const double* c = row(i);
  double s = 0.0;
  for (int l = 0; l < dim; ++l) s += c[l] * system.eigenfunction_derivative(l + 1, t);
  return s;
}

std::uint64_t ProductAllocation::n_rec() const {
  std::uint64_t p = 1;
  for (int s : sizes) p *= static_cast<std::uint64_t>(s);
  return p;
}

double product_error(std::span<const int> sizes, const KLSystem& sys,
                     std::span<const double> scalar_sq_errors) {
  double err2 = sys.total_trace();
  for (std::size_t n = 0; n < sizes.size(); ++n) {
    const int M = sizes[n];
    if (M < 1) throw std::invalid_argument("product_error: sizes must be >= 1");
    if (M >= static_cast<int>(scalar_sq_errors.size()))
      throw std::invalid_argument("product_error: scalar error table too short");
    err2 += sys.eigenvalue(static_cast<int>(n) + 1) * (scalar_sq_errors[M] - 1.0);
  }
  return std::sqrt(err2);
}

ProductAllocation optimal_allocation(std::uint64_t n_budget, const KLSystem& sys,
                                     std::span<const double> scalar_sq_errors,
                                     int max_marginal, int max_length) {
  if (n_budget < 1) throw std::invalid_argument("optimal_allocation: budget >= 1 required");
  if (max_marginal >= static_cast<int>(scalar_sq_errors.size()))
    max_marginal = static_cast<int>(scalar_sq_errors.size()) - 1;

  // Best possible marginal improvement factor, for the pruning bound.
  double best_gain = 0.0;  // max over M of (1 - e^2_M)
  for (int M = 2; M <= max_marginal; ++M)
    best_gain = std::max(best_gain, 1.0 - scalar_sq_errors[M]);

  std::vector<int> current, best_sizes;
  double best_err2 = sys.total_trace();  // empty allocation

  // partial = sum over chosen coordinates of lambda_n (e^2 - 1).
  auto dfs = [&](auto&& self, int depth, int cap, std::uint64_t budget, double partial) -> void {
    if (depth >= max_length || budget < 2) return;
    const double lambda = sys.eigenvalue(depth + 1);
    const int top = static_cast<int>(std::min<std::uint64_t>(cap, budget));
    for (int M = 2; M <= top; ++M) {
      const double term = lambda * (scalar_sq_errors[M] - 1.0);
      const double err2 = sys.total_trace() + partial + term;
      current.push_back(M);
      if (err2 < best_err2) {
        best_err2 = err2;
        best_sizes = current;
      }
      // Even filling every remaining coordinate with the best marginal cannot
      // recover more than best_gain * tail; prune when that is hopeless.
      const double bound = err2 - best_gain * sys.eigen_tail(depth + 1);
      if (bound < best_err2)
        self(self, depth + 1, M, budget / static_cast<std::uint64_t>(M), partial + term);
      current.pop_back();
    }
  };
  dfs(dfs, 0, max_marginal, n_budget, 0.0);

  ProductAllocation out;
  out.sizes = best_sizes;
  out.quant_error = std::sqrt(best_err2);
  return out;
}

FunctionalQuantizer build_product_fq(const ProductAllocation& alloc, const KLSystem& sys,
                                     const std::vector<ScalarQuantizer>& marginals) {
  // Trailing unit sizes carry no information; canonicalize them away.
  std::vector<int> sizes = alloc.sizes;
  while (!sizes.empty() && sizes.back() == 1) sizes.pop_back();
  const int m = static_cast<int>(sizes.size());
  if (static_cast<int>(marginals.size()) < m)
    throw std::invalid_argument("build_product_fq: missing marginal quantizers");
  for (int n = 0; n < m; ++n)
    if (marginals[n].size() != sizes[n])
      throw std::invalid_argument("build_product_fq: marginal size mismatch");

  std::uint64_t N = 1;
  for (int s : sizes) N *= static_cast<std::uint64_t>(s);

  FunctionalQuantizer fq;
  fq.system = sys;
  fq.dim = m;
  fq.mode = "product";
  fq.allocation = sizes;
  fq.coeffs.assign(N * static_cast<std::size_t>(m), 0.0);
  fq.weights.assign(N, 1.0);

  std::vector<double> sqrt_lam(m);
  for (int n = 0; n < m; ++n) sqrt_lam[n] = std::sqrt(sys.eigenvalue(n + 1));

  std::vector<int> idx(m, 0);
  for (std::uint64_t i = 0; i < N; ++i) {
    double w = 1.0;
    double* c = fq.coeffs.data() + i * m;
    for (int n = 0; n < m; ++n) {
      c[n] = sqrt_lam[n] * marginals[n].points[idx[n]];
      w *= marginals[n].weights[idx[n]];
    }
    fq.weights[i] = w;
    for (int n = m - 1; n >= 0; --n) {  // last coordinate fastest
      if (++idx[n] < sizes[n]) break;
      idx[n] = 0;
    }
  }

  double fin = 0.0;
  for (int n = 0; n < m; ++n) fin += sys.eigenvalue(n + 1) * marginals[n].distortion;
  fq.fin_dim_distortion = fin;
  // quant_error straight from the allocation identity on this system.
  double err2 = sys.total_trace();
  for (int n = 0; n < m; ++n) err2 += sys.eigenvalue(n + 1) * (marginals[n].distortion - 1.0);
  fq.quant_error = std::sqrt(err2);
  return fq;
}

FunctionalQuantizer build_product_fq(std::uint64_t n_budget, const KLSystem& sys) {
  const auto table = scalar_error_table(64);
  const auto alloc = optimal_allocation(n_budget, sys, table);
  std::vector<ScalarQuantizer> marginals;
  marginals.reserve(alloc.sizes.size());
  for (int s : alloc.sizes) marginals.push_back(optimal_normal_quantizer(s));
  return build_product_fq(alloc, sys, marginals);
}

FunctionalQuantizer build_optimal_fq(int N, const KLSystem& sys, const OptSchedule& schedule,
                                     RngStream rng) {
  const int d = dimension_rule(static_cast<std::uint64_t>(N));
  Codebook cb = optimize_pipeline(N, sys.cov_norm(d), schedule, rng);

  FunctionalQuantizer fq;
  fq.system = sys;
  fq.dim = d;
  fq.mode = "optimal";
  fq.weights = cb.weights;
  fq.fin_dim_distortion = cb.distortion;
  fq.quant_error = std::sqrt(cb.distortion + sys.eigen_tail(d));
  fq.meta = cb.meta;
  fq.coeffs.resize(cb.points.size());
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < d; ++k)
      fq.coeffs[static_cast<std::size_t>(i) * d + k] =
          cb.row(i)[k] * std::sqrt(cb.norm.lambdas[k]);
  return fq;
}

double fbm_rate_constant(double H) {
  if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("fbm_rate_constant: H in (0,1) required");
  const double g = std::tgamma(2.0 * H);
  const double front = std::sqrt(g * std::sin(kPi * H) * (1.0 + 2.0 * H) / kPi);
  return front * std::pow((1.0 + 2.0 * H) / (2.0 * kPi), H);
}

std::vector<double> uniform_grid(double T, int n) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) t[j] = T * static_cast<double>(j) / n;
  return t;
}

QuantizedPathEnsemble synthesize_paths(const FunctionalQuantizer& fq,
                                       std::span<const double> tgrid) {
  const int N = fq.size(), d = fq.dim;
  const int L = static_cast<int>(tgrid.size());
  // Basis table first; the synthesis is then a plain matrix product.
  std::vector<double> basis(static_cast<std::size_t>(d) * L);
  for (int l = 0; l < d; ++l)
    for (int j = 0; j < L; ++j)
      basis[static_cast<std::size_t>(l) * L + j] = fq.system.eigenfunction(l + 1, tgrid[j]);

  QuantizedPathEnsemble e;
  e.tgrid.assign(tgrid.begin(), tgrid.end());
  e.weights = fq.weights;
  e.paths.assign(static_cast<std::size_t>(N) * L, 0.0);
  e.provenance = "synthesize:" + fq.mode;
  for (int i = 0; i < N; ++i) {
    const double* c = fq.row(i);
    double* p = e.path(i);
    for (int l = 0; l < d; ++l) {
      const double cl = c[l];
      const double* b = basis.data() + static_cast<std::size_t>(l) * L;
      for (int j = 0; j < L; ++j) p[j] += cl * b[j];
    }
  }
  return e;
}

}  // namespace fquant
