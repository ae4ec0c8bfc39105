#include "fquant/vq_optim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "fquant/parallel.hpp"

namespace fquant {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// One Monte Carlo pass over the codebook: per-cell hit counts and coordinate
// sums, plus first/second moments of the squared distance statistics.
struct PassAccum {
  std::vector<double> sum;
  std::vector<std::uint64_t> count;
  double dist_sum = 0.0, dist_sumsq = 0.0;
  double q_sum = 0.0, q_sumsq = 0.0;

  void init(int n, int d) {
    sum.assign(static_cast<std::size_t>(n) * d, 0.0);
    count.assign(n, 0);
  }
  void merge(const PassAccum& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += o.sum[i];
    for (std::size_t i = 0; i < count.size(); ++i) count[i] += o.count[i];
    dist_sum += o.dist_sum;
    dist_sumsq += o.dist_sumsq;
    q_sum += o.q_sum;
    q_sumsq += o.q_sumsq;
  }
};

inline int scan_nearest(const Codebook& cb, const double* z, double* best_out) {
  const int n = cb.size(), d = cb.dim;
  const double* lam = cb.norm.lambdas.data();
  double best = kInf;
  int bi = 0;
  for (int i = 0; i < n; ++i) {
    const double* p = cb.row(i);
    double s = 0.0;
    int k = 0;
    for (; k < d; ++k) {
      const double diff = z[k] - p[k];
      s += lam[k] * diff * diff;
      if (s >= best) break;
    }
    if (k == d && s < best) {
      best = s;
      bi = i;
    }
  }
  *best_out = best;
  return bi;
}

PassAccum run_pass(const Codebook& cb, std::uint64_t samples, const RngStream& stream) {
  const int n = cb.size(), d = cb.dim;
  std::vector<double> x2(n);  // |x_i|^2 under the norm
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    const double* p = cb.row(i);
    for (int k = 0; k < d; ++k) s += cb.norm.lambdas[k] * p[k] * p[k];
    x2[i] = s;
  }

  const int n_chunks = default_chunk_count();
  std::vector<PassAccum> parts(n_chunks);
  parallel_chunks(samples, n_chunks, [&](int c, std::uint64_t b, std::uint64_t e) {
    PassAccum& acc = parts[c];
    acc.init(n, d);
    std::vector<double> z(d);
    for (std::uint64_t s = b; s < e; ++s) {
      fill_gaussians(stream, s * static_cast<std::uint64_t>(d), z);
      double best;
      const int bi = scan_nearest(cb, z.data(), &best);
      ++acc.count[bi];
      double* srow = acc.sum.data() + static_cast<std::size_t>(bi) * d;
      for (int k = 0; k < d; ++k) srow[k] += z[k];
      acc.dist_sum += best;
      acc.dist_sumsq += best * best;
      const double q = x2[bi] + best;
      acc.q_sum += q;
      acc.q_sumsq += q * q;
    }
  });

  PassAccum total;
  total.init(n, d);
  for (const auto& p : parts) total.merge(p);
  return total;
}

// Turns pass statistics into companion parameters on the codebook.
void apply_estimate(Codebook& cb, const PassAccum& acc, std::uint64_t samples) {
  const int n = cb.size(), d = cb.dim;
  const double inv = 1.0 / static_cast<double>(samples);

  cb.weights.resize(n);
  double partial = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    cb.weights[i] = static_cast<double>(acc.count[i]) * inv;
    partial += cb.weights[i];
  }
  cb.weights[n - 1] = 1.0 - partial;  // frequencies sum to one exactly

  const double mean = acc.dist_sum * inv;
  cb.distortion = mean;
  cb.meta.distortion_se = std::sqrt(std::max(0.0, acc.dist_sumsq * inv - mean * mean) * inv);
  const double qmean = acc.q_sum * inv;
  cb.meta.second_moment_plus_dist = qmean;
  cb.meta.second_moment_plus_dist_se =
      std::sqrt(std::max(0.0, acc.q_sumsq * inv - qmean * qmean) * inv);

  double res = 0.0, wse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = static_cast<double>(acc.count[i]) * inv;
    wse = std::max(wse, std::sqrt(std::max(0.0, w * (1.0 - w)) * inv));
    if (acc.count[i] == 0) continue;
    const double* p = cb.row(i);
    const double* s = acc.sum.data() + static_cast<std::size_t>(i) * d;
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = s[k] / static_cast<double>(acc.count[i]) - p[k];
      r2 += cb.norm.lambdas[k] * diff * diff;
    }
    res = std::max(res, std::sqrt(r2));
  }
  cb.meta.stationarity_residual = res;
  cb.meta.max_weight_se = wse;
}

// Splitting law draw: centered gaussian with covariance (1 + 2/d) diag(lambda).
void splitting_sample(const CovNorm& norm, const RngStream& stream, std::uint64_t first_g,
                      double* out) {
  const int d = norm.dim();
  const double scale = 1.0 + 2.0 / d;
  std::vector<double> g(d);
  fill_gaussians(stream, first_g, g);
  for (int k = 0; k < d; ++k) out[k] = std::sqrt(scale * norm.lambdas[k]) * g[k];
}
}  // namespace

OptSchedule OptSchedule::quick() {
  OptSchedule s;
  s.clvq_steps_intermediate = 30'000;
  s.clvq_steps_final = 100'000;
  s.lloyd_iters_intermediate = 4;
  s.lloyd_iters_final = 8;
  s.lloyd_samples_min_intermediate = 5'000;
  s.lloyd_samples_per_codeword_intermediate = 100;
  s.lloyd_samples_min_final = 20'000;
  s.lloyd_samples_per_codeword_final = 400;
  s.estimate_samples_min = 200'000;
  s.estimate_samples_per_codeword = 1'000;
  return s;
}

std::string OptSchedule::digest() const {
  char buf[320];
  std::snprintf(buf, sizeof buf, "c=%.17g;k0=%llu;ci=%llu;cf=%llu;li=%d;lf=%d;smi=%llu;spi=%llu;smf=%llu;spf=%llu;em=%llu;ep=%llu;div=%d",
                clvq_c, (unsigned long long)clvq_k0, (unsigned long long)clvq_steps_intermediate,
                (unsigned long long)clvq_steps_final, lloyd_iters_intermediate, lloyd_iters_final,
                (unsigned long long)lloyd_samples_min_intermediate,
                (unsigned long long)lloyd_samples_per_codeword_intermediate,
                (unsigned long long)lloyd_samples_min_final,
                (unsigned long long)lloyd_samples_per_codeword_final,
                (unsigned long long)estimate_samples_min,
                (unsigned long long)estimate_samples_per_codeword, split_divisor);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char* p = buf; *p; ++p) h = (h ^ static_cast<unsigned char>(*p)) * 0x100000001B3ULL;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)h);
  return hex;
}

Codebook trivial_codebook(const CovNorm& norm) {
  norm.validate();
  Codebook cb;
  cb.dim = norm.dim();
  cb.norm = norm;
  cb.points.assign(cb.dim, 0.0);
  cb.weights = {1.0};
  cb.distortion = norm.trace();
  cb.meta.second_moment_plus_dist = norm.trace();
  return cb;
}

Codebook clvq(Codebook cb, std::uint64_t samples, double c, RngStream rng, std::uint64_t k0) {
  const int d = cb.dim;
  std::vector<double> z(d);
  for (std::uint64_t k = 0; k < samples; ++k) {
    fill_gaussians(rng, k * static_cast<std::uint64_t>(d), z);
    double best;
    const int bi = scan_nearest(cb, z.data(), &best);
    const double g = c / static_cast<double>(k + 1 + k0);
    double* p = cb.row(bi);
    for (int j = 0; j < d; ++j) p[j] += g * (z[j] - p[j]);
  }
  cb.meta.clvq_steps += samples;
  return cb;
}

Codebook lloyd_randomized(Codebook cb, std::uint64_t samples_per_iter, int iters, RngStream rng) {
  if (samples_per_iter < static_cast<std::uint64_t>(cb.size()))
    throw std::invalid_argument("lloyd_randomized: fewer samples than codewords");
  const int n = cb.size(), d = cb.dim;
  for (int it = 0; it < iters; ++it) {
    const RngStream s = rng.derive(0x110D ^ static_cast<std::uint64_t>(it));
    PassAccum acc = run_pass(cb, samples_per_iter, s);
    const RngStream reseed = s.derive(0xE);
    int reseeds = 0;
    for (int i = 0; i < n; ++i) {
      double* p = cb.row(i);
      if (acc.count[i] == 0) {
        splitting_sample(cb.norm, reseed, static_cast<std::uint64_t>(reseeds++) * d, p);
        continue;
      }
      const double* srow = acc.sum.data() + static_cast<std::size_t>(i) * d;
      for (int k = 0; k < d; ++k) p[k] = srow[k] / static_cast<double>(acc.count[i]);
    }
    cb.meta.empty_cell_reseeds += reseeds;
    cb.meta.samples_used += samples_per_iter;
  }
  cb.meta.lloyd_iterations += iters;

  // Companion parameters for the grid actually returned.
  const RngStream fin = rng.derive(0xF1A);
  PassAccum acc = run_pass(cb, samples_per_iter, fin);
  apply_estimate(cb, acc, samples_per_iter);
  cb.meta.samples_used += samples_per_iter;
  return cb;
}

Codebook splitting_extend(const Codebook& cb, int nu, RngStream rng) {
  if (nu < 0) throw std::invalid_argument("splitting_extend: nu >= 0 required");
  Codebook out = cb;
  if (nu == 0) return out;
  const int d = cb.dim;
  out.points.resize(static_cast<std::size_t>(cb.size() + nu) * d);
  for (int r = 0; r < nu; ++r)
    splitting_sample(cb.norm, rng, static_cast<std::uint64_t>(r) * d,
                     out.points.data() + static_cast<std::size_t>(cb.size() + r) * d);
  out.weights.assign(cb.size() + nu, 1.0 / (cb.size() + nu));
  return out;
}

Codebook estimate_distortion_weights(Codebook cb, std::uint64_t samples, RngStream rng) {
  if (samples < static_cast<std::uint64_t>(cb.size()))
    throw std::invalid_argument("estimate_distortion_weights: samples >= N required");
  PassAccum acc = run_pass(cb, samples, rng);
  apply_estimate(cb, acc, samples);
  cb.meta.estimate_samples = samples;
  return cb;
}

Codebook optimize_pipeline(int N, CovNorm norm, const OptSchedule& schedule, RngStream rng) {
  if (N < 1) throw std::invalid_argument("optimize_pipeline: N >= 1 required");
  norm.validate();

  Codebook cb = trivial_codebook(norm);
  cb.meta.seed = rng.seed;
  cb.meta.schedule_digest = schedule.digest();
  cb.meta.history.push_back({1, norm.trace(), 0.0});
  if (N == 1) return cb;

  int level = 0;
  while (cb.size() < N) {
    ++level;
    const std::uint64_t salt = static_cast<std::uint64_t>(level) * 8;
    int nu = std::max(1, cb.size() / schedule.split_divisor);
    nu = std::min(nu, N - cb.size());
    cb = splitting_extend(cb, nu, rng.derive(salt + 1));
    const bool final_level = cb.size() == N;

    cb = clvq(cb, final_level ? schedule.clvq_steps_final : schedule.clvq_steps_intermediate,
              schedule.clvq_c, rng.derive(salt + 2), schedule.clvq_k0);

    const std::uint64_t per_cw = final_level ? schedule.lloyd_samples_per_codeword_final
                                             : schedule.lloyd_samples_per_codeword_intermediate;
    const std::uint64_t floor_s = final_level ? schedule.lloyd_samples_min_final
                                              : schedule.lloyd_samples_min_intermediate;
    const std::uint64_t samples =
        std::max(floor_s, per_cw * static_cast<std::uint64_t>(cb.size()));
    cb = lloyd_randomized(cb, samples,
                          final_level ? schedule.lloyd_iters_final
                                      : schedule.lloyd_iters_intermediate,
                          rng.derive(salt + 3));
    cb.meta.history.push_back({cb.size(), cb.distortion, cb.meta.distortion_se});
  }

  const std::uint64_t est = std::max(schedule.estimate_samples_min,
                                     schedule.estimate_samples_per_codeword *
                                         static_cast<std::uint64_t>(N));
  cb = estimate_distortion_weights(std::move(cb), est, rng.derive(0xF17AA));
  cb.meta.history.back() = {N, cb.distortion, cb.meta.distortion_se};
  return cb;
}

}  // namespace fquant
