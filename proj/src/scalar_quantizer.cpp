#include "fquant/scalar_quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fquant/gaussian.hpp"

namespace fquant {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> midpoints(const std::vector<double>& x) {
  const std::size_t m = x.size();
  std::vector<double> b(m + 1);
  b[0] = -kInf;
  for (std::size_t i = 1; i < m; ++i) b[i] = 0.5 * (x[i - 1] + x[i]);
  b[m] = kInf;
  return b;
}

// Sup-norm distance between each codeword and its cell conditional mean.
double stationarity_residual(const std::vector<double>& x) {
  const auto b = midpoints(x);
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto m = gaussian_cell_moments(b[i], b[i + 1]);
    r = std::max(r, std::abs(x[i] - m.mean_part / m.mass));
  }
  return r;
}

// Newton step on the gradient G_i = 2 (x_i mass_i - mean_i) with the
// tridiagonal Hessian
//   H_ii      = 2 mass_i - (x_{i+1}-x_i) phi(m_i)/2 - (x_i-x_{i-1}) phi(m_{i-1})/2
//   H_{i,i+1} = -(x_{i+1}-x_i) phi(m_i)/2
// (boundary terms vanish since phi(+-inf) = 0). Returns the damped update.
bool newton_sweep(std::vector<double>& x) {
  const std::size_t m = x.size();
  const auto b = midpoints(x);
  std::vector<double> grad(m), diag(m), off(m > 1 ? m - 1 : 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto cm = gaussian_cell_moments(b[i], b[i + 1]);
    grad[i] = 2.0 * (x[i] * cm.mass - cm.mean_part);
    diag[i] = 2.0 * cm.mass;
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double w = 0.5 * (x[i + 1] - x[i]) * normal_pdf(b[i + 1]);
    off[i] = -w;
    diag[i] -= w;
    diag[i + 1] -= w;
  }

  // Thomas solve H d = -grad.
  std::vector<double> c(m), d(m);
  double beta = diag[0];
  if (!(beta > 0.0)) return false;
  d[0] = -grad[0] / beta;
  for (std::size_t i = 1; i < m; ++i) {
    c[i] = off[i - 1] / beta;
    beta = diag[i] - off[i - 1] * c[i];
    if (!(beta > 0.0)) return false;
    d[i] = (-grad[i] - off[i - 1] * d[i - 1]) / beta;
  }
  for (std::size_t i = m - 1; i-- > 0;) d[i] -= c[i + 1] * d[i + 1];

  // Damp until ordering is preserved.
  double step = 1.0;
  for (int halvings = 0; halvings < 60; ++halvings) {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < m && ok; ++i)
      ok = x[i] + step * d[i] < x[i + 1] + step * d[i + 1];
    if (ok) break;
    step *= 0.5;
  }
  for (std::size_t i = 0; i < m; ++i) x[i] += step * d[i];
  return true;
}

void finalize_normal(ScalarQuantizer& q) {
  const auto b = midpoints(q.points);
  const std::size_t m = q.points.size();
  q.weights.resize(m);
  double dist = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto cm = gaussian_cell_moments(b[i], b[i + 1]);
    q.weights[i] = cm.mass;
    dist += cm.second_part - 2.0 * q.points[i] * cm.mean_part + q.points[i] * q.points[i] * cm.mass;
  }
  // Pin the weight sum to 1 exactly.
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) partial += q.weights[i];
  q.weights[m - 1] = 1.0 - partial;
  q.distortion = dist;
  q.residual = stationarity_residual(q.points);
}
}  // namespace

std::vector<double> ScalarQuantizer::cell_bounds() const {
  if (law == ScalarLaw::StdNormal) return midpoints(points);
  std::vector<double> b = midpoints(points);
  b.front() = a;
  b.back() = this->b;
  return b;
}

ScalarQuantizer optimal_normal_quantizer(int M, double tol) {
  if (M < 1) throw std::invalid_argument("optimal_normal_quantizer: M >= 1 required");
  if (!(tol > 0.0)) throw std::invalid_argument("optimal_normal_quantizer: tol > 0 required");

  ScalarQuantizer q;
  q.law = ScalarLaw::StdNormal;
  if (M == 1) {
    q.points = {0.0};
    q.weights = {1.0};
    q.distortion = 1.0;
    return q;
  }

  std::vector<double> x(M);
  for (int i = 0; i < M; ++i) x[i] = normal_quantile((2.0 * i + 1.0) / (2.0 * M));

  const int max_iters = 200;
  double res = kInf;
  int it = 0;
  for (; it < max_iters; ++it) {
    res = stationarity_residual(x);
    if (res < tol) break;
    if (!newton_sweep(x)) {
      // Fall back to a Lloyd sweep if the Hessian loses definiteness.
      x = lloyd_normal_fixed_point(std::move(x), tol, 1);
    }
  }
  if (res >= tol) {
    // Newton stalled; polish with Lloyd before giving up.
    int extra = 0;
    x = lloyd_normal_fixed_point(std::move(x), tol, 100000, &extra);
    it += extra;
    res = stationarity_residual(x);
    if (res >= tol)
      throw ConvergenceError("optimal_normal_quantizer: no convergence after max iterations", res);
  }

  // The unique optimum is symmetric; fold out the residual asymmetry.
  for (int i = 0; i < M / 2; ++i) {
    const double v = 0.5 * (x[i] - x[M - 1 - i]);
    x[i] = v;
    x[M - 1 - i] = -v;
  }
  if (M % 2 == 1) x[M / 2] = 0.0;

  q.points = std::move(x);
  q.iterations = it;
  finalize_normal(q);
  return q;
}

ScalarQuantizer optimal_uniform_quantizer(double a, double b, int M) {
  if (!(a < b)) throw std::invalid_argument("optimal_uniform_quantizer: a < b required");
  if (M < 1) throw std::invalid_argument("optimal_uniform_quantizer: M >= 1 required");
  ScalarQuantizer q;
  q.law = ScalarLaw::Uniform;
  q.a = a;
  q.b = b;
  q.points.resize(M);
  q.weights.assign(M, 1.0 / M);
  for (int k = 1; k <= M; ++k) q.points[k - 1] = a + (2.0 * k - 1.0) * (b - a) / (2.0 * M);
  q.distortion = (b - a) * (b - a) / (12.0 * M * M);
  double partial = 0.0;
  for (int i = 0; i + 1 < M; ++i) partial += q.weights[i];
  q.weights[M - 1] = 1.0 - partial;
  return q;
}

std::vector<double> lloyd_normal_fixed_point(std::vector<double> points, double tol,
                                             int max_iters, int* iters_out) {
  if (points.empty()) throw std::invalid_argument("lloyd_normal_fixed_point: empty grid");
  int it = 0;
  for (; it < max_iters; ++it) {
    const auto b = midpoints(points);
    double res = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto cm = gaussian_cell_moments(b[i], b[i + 1]);
      const double next = cm.mean_part / cm.mass;
      res = std::max(res, std::abs(next - points[i]));
      points[i] = next;
    }
    if (res < tol) {
      ++it;
      break;
    }
  }
  if (iters_out) *iters_out = it;
  return points;
}

std::vector<double> scalar_error_table(int max_M, double tol) {
  std::vector<double> table(static_cast<std::size_t>(max_M) + 1);
  table[0] = 1.0;
  for (int M = 1; M <= max_M; ++M) table[M] = optimal_normal_quantizer(M, tol).distortion;
  return table;
}

}  // namespace fquant
