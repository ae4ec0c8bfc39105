#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fquant {

// Non-increasing positive eigenvalue weights of the diagonal covariance norm
// |z|^2 = sum_k lambda_k z_k^2.
struct CovNorm {
  std::vector<double> lambdas;

  int dim() const { return static_cast<int>(lambdas.size()); }
  double trace() const;
  void validate() const;  // throws std::invalid_argument
};

struct LevelStat {
  int size = 0;
  double distortion = 0.0;
  double se = 0.0;
};

// Optimization provenance carried alongside a codebook.
struct CodebookMeta {
  std::uint64_t seed = 0;
  std::uint64_t clvq_steps = 0;
  int lloyd_iterations = 0;
  std::uint64_t samples_used = 0;
  std::uint64_t estimate_samples = 0;
  int empty_cell_reseeds = 0;
  double stationarity_residual = 0.0;  // max_i |cell mean - point_i| under the norm
  double distortion_se = 0.0;
  double max_weight_se = 0.0;
  // MC mean (and s.e.) of |x_hat(Z)|^2_lambda + dist^2(Z); equals trace(norm)
  // for a stationary grid (Pythagoras check material).
  double second_moment_plus_dist = 0.0;
  double second_moment_plus_dist_se = 0.0;
  std::string schedule_digest;
  std::vector<LevelStat> history;  // distortion across splitting levels
};

// N-point codebook in R^d optimized for a diagonal-covariance norm. The
// quantized law is the standard gaussian product; the norm carries the
// eigenvalue weights.
struct Codebook {
  int dim = 0;
  std::vector<double> points;   // N x dim, row-major
  std::vector<double> weights;  // length N
  double distortion = 0.0;
  CovNorm norm;
  CodebookMeta meta;

  int size() const { return dim > 0 ? static_cast<int>(points.size()) / dim : 0; }
  const double* row(int i) const { return points.data() + static_cast<std::size_t>(i) * dim; }
  double* row(int i) { return points.data() + static_cast<std::size_t>(i) * dim; }
};

double weighted_dist2(std::span<const double> lambdas, const double* a, const double* b);

// Index of the nearest codeword under the codebook's norm; ties resolve to
// the smallest index.
int nearest_index(const Codebook& cb, std::span<const double> z);

}  // namespace fquant
