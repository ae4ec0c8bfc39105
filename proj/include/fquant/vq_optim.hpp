#pragma once

#include "fquant/codebook.hpp"
#include "fquant/rng.hpp"

namespace fquant {

// Budget knobs for the splitting pipeline. Intermediate levels only need
// rough placement; the requested level gets the full polish and a fresh
// estimation pass.
struct OptSchedule {
  double clvq_c = 1.0;
  std::uint64_t clvq_k0 = 100;  // step c/(k + k0) tames the first moves
  std::uint64_t clvq_steps_intermediate = 200'000;
  std::uint64_t clvq_steps_final = 1'000'000;
  int lloyd_iters_intermediate = 8;
  int lloyd_iters_final = 20;
  std::uint64_t lloyd_samples_min_intermediate = 20'000;
  std::uint64_t lloyd_samples_per_codeword_intermediate = 300;
  std::uint64_t lloyd_samples_min_final = 100'000;
  std::uint64_t lloyd_samples_per_codeword_final = 2'000;
  std::uint64_t estimate_samples_min = 1'000'000;
  std::uint64_t estimate_samples_per_codeword = 4'000;
  int split_divisor = 10;  // nu = max(1, N / split_divisor)

  static OptSchedule defaults() { return {}; }
  static OptSchedule quick();  // light budgets for tests
  std::string digest() const;
};

// Single-codeword start: the optimal 1-quantizer of the centered law.
Codebook trivial_codebook(const CovNorm& norm);

// Competitive learning steps: draws `samples` standard gaussian vectors and
// moves only the winning codeword toward each draw by factor c/(k + k0).
// Strictly sequential.
Codebook clvq(Codebook cb, std::uint64_t samples, double c, RngStream rng,
              std::uint64_t k0 = 100);

// Randomized Lloyd I: each iteration replaces every codeword by the Monte
// Carlo estimate of its cell conditional mean; empty cells are re-seeded from
// the splitting law and counted in meta. A final pass re-estimates weights
// and distortion for the returned grid.
Codebook lloyd_randomized(Codebook cb, std::uint64_t samples_per_iter, int iters, RngStream rng);

// Appends nu fresh codewords sampled from the splitting law, a centered
// gaussian with per-coordinate variance (1 + 2/d) lambda_k. Existing points
// are preserved bit-exactly; weights reset to uniform pending re-estimation.
Codebook splitting_extend(const Codebook& cb, int nu, RngStream rng);

// Monte Carlo companion parameters: cell frequencies, distortion with its
// standard error, stationarity residual.
Codebook estimate_distortion_weights(Codebook cb, std::uint64_t samples, RngStream rng);

// Splitting method from size 1 up to N under the given norm (dimension fixed
// throughout): per level CLVQ for placement then Lloyd for polish, final
// level followed by a dedicated estimation pass.
Codebook optimize_pipeline(int N, CovNorm norm, const OptSchedule& schedule, RngStream rng);

}  // namespace fquant
