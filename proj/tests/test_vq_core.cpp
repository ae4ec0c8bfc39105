#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fquant/kl_basis.hpp"
#include "fquant/rng.hpp"
#include "fquant/scalar_quantizer.hpp"
#include "fquant/vq_optim.hpp"
#include "test_util.hpp"

using namespace fquant;

namespace {
Codebook make_codebook(std::vector<double> lambdas, std::vector<double> points_rowmajor,
                       int dim) {
  Codebook cb;
  cb.dim = dim;
  cb.norm.lambdas = std::move(lambdas);
  cb.points = std::move(points_rowmajor);
  cb.weights.assign(cb.size(), 1.0 / cb.size());
  return cb;
}
}  // namespace

TEST_CASE("rng streams are reproducible and counter-addressable") {
  RngStream a{42, 0}, b{42, 0};
  for (int i = 0; i < 100; ++i) CHECK(a.next_uniform() == b.next_uniform());
  CHECK(a.uniform_at(17) == RngStream{42, 999}.uniform_at(17));
  CHECK(a.derive(7).seed == b.derive(7).seed);
  CHECK(a.derive(7).seed != a.derive(8).seed);

  // fill_gaussians agrees with per-index access regardless of alignment
  std::vector<double> buf(9);
  fill_gaussians(a, 3, buf);
  for (int i = 0; i < 9; ++i) CHECK(buf[i] == a.gaussian_at(3 + i));

  // moments sanity
  double m = 0.0, v = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = a.gaussian_at(i);
    m += g;
    v += g * g;
  }
  m /= n;
  v /= n;
  CHECK(std::abs(m) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(v == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("nearest_index basics and tie convention") {
  auto cb1 = make_codebook({1.0}, {0.3}, 1);
  CHECK(nearest_index(cb1, std::vector<double>{5.0}) == 0);

  auto cb2 = make_codebook({1.0}, {0.0, 1.0}, 1);
  CHECK(nearest_index(cb2, std::vector<double>{0.2}) == 0);
  CHECK(nearest_index(cb2, std::vector<double>{0.8}) == 1);
  // exact tie at the midpoint resolves to the smallest index
  CHECK(nearest_index(cb2, std::vector<double>{0.5}) == 0);
}

TEST_CASE("nearest_index equals exhaustive scan on random instances") {
  RngStream rng{1234, 0};
  std::uint64_t g = 0;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_at(g++) * 16);
    const int d = 1 + static_cast<int>(rng.uniform_at(g++) * 5);
    std::vector<double> lam(d);
    double prev = 1.0;
    for (int k = 0; k < d; ++k) {
      prev *= 0.3 + 0.7 * rng.uniform_at(g++);
      lam[k] = prev;
    }
    std::vector<double> pts(static_cast<std::size_t>(n) * d);
    fill_gaussians(rng, g, pts);
    g += pts.size();
    auto cb = make_codebook(lam, pts, d);
    std::vector<double> z(d);
    for (int rep = 0; rep < 20; ++rep) {
      fill_gaussians(rng, g, z);
      g += d;
      const int got = nearest_index(cb, z);
      const int want = testutil::brute_force_nearest(cb.points, n, d, lam, z);
      CHECK(got == want);
      ++checked;
    }
  }
  CHECK(checked == 20000);
}

TEST_CASE("clvq pulls a single codeword to the mean") {
  auto cb = make_codebook({1.0}, {1.5}, 1);
  cb = clvq(std::move(cb), 1'000'000, 1.0, RngStream{7, 0});
  CHECK(std::abs(cb.points[0]) < 0.01);
}

TEST_CASE("clvq with zero constant leaves the codebook unchanged") {
  auto cb = make_codebook({1.0, 0.5}, {0.4, -0.2, 1.0, 2.0}, 2);
  const auto before = cb.points;
  cb = clvq(std::move(cb), 10'000, 0.0, RngStream{8, 0});
  CHECK(cb.points == before);
}

TEST_CASE("clvq converges to the two-point optimal grid") {
  const double root = std::sqrt(2.0 / 3.14159265358979323846);
  auto cb = make_codebook({1.0}, {-2.0, 2.0}, 1);
  cb = clvq(std::move(cb), 10'000'000, 1.0, RngStream{9, 0});
  CHECK(cb.points[0] == doctest::Approx(-root).epsilon(0.03));
  CHECK(cb.points[1] == doctest::Approx(root).epsilon(0.03));
}

TEST_CASE("exact 1-D Lloyd from a skewed start hits the optimal grid") {
  // closed-form cell moments, no randomization
  const double root = std::sqrt(2.0 / 3.14159265358979323846);
  const auto x = lloyd_normal_fixed_point({-1.0, 3.0}, 1e-12, 100000);
  CHECK(std::abs(x[0] + root) < 1e-10);
  CHECK(std::abs(x[1] - root) < 1e-10);
}

TEST_CASE("randomized Lloyd: stationary start stays put within noise") {
  const double root = std::sqrt(2.0 / 3.14159265358979323846);
  auto cb = make_codebook({1.0}, {-root, root}, 1);
  const std::uint64_t S = 200'000;
  auto out = lloyd_randomized(cb, S, 1, RngStream{11, 0});
  // each cell holds half the samples; conditional sd of a half-normal cell
  const double cell_sd = std::sqrt(1.0 - 2.0 / 3.14159265358979323846);
  const double se = cell_sd / std::sqrt(S / 2.0);
  CHECK(std::abs(out.points[0] + root) < 3.0 * se);
  CHECK(std::abs(out.points[1] - root) < 3.0 * se);
}

TEST_CASE("randomized Lloyd: single codeword becomes the sample mean") {
  auto cb = make_codebook({1.0, 1.0}, {3.0, -3.0}, 2);
  const std::uint64_t S = 100'000;
  auto out = lloyd_randomized(cb, S, 1, RngStream{12, 0});
  CHECK(std::abs(out.points[0]) < 4.0 / std::sqrt(static_cast<double>(S)));
  CHECK(std::abs(out.points[1]) < 4.0 / std::sqrt(static_cast<double>(S)));
  CHECK(out.weights[0] == 1.0);
}

TEST_CASE("splitting_extend: identity at nu=0, bit-exact originals, seeding law") {
  auto cb = make_codebook({0.7}, {-0.5, 0.5}, 1);
  const auto same = splitting_extend(cb, 0, RngStream{13, 0});
  CHECK(same.points == cb.points);

  const int nu = 100'000;
  const auto ext = splitting_extend(cb, nu, RngStream{13, 0});
  CHECK(ext.size() == 2 + nu);
  CHECK(ext.points[0] == cb.points[0]);
  CHECK(ext.points[1] == cb.points[1]);
  double m = 0.0, v = 0.0;
  for (int i = 2; i < ext.size(); ++i) {
    m += ext.points[i];
    v += ext.points[i] * ext.points[i];
  }
  m /= nu;
  v = v / nu - m * m;
  // phi^{d/(d+2)} at d=1: variance 3 lambda_1
  CHECK(v == doctest::Approx(3.0 * 0.7).epsilon(0.02));

  auto cb2 = make_codebook({0.4, 0.1}, {0.0, 0.0}, 2);
  const auto ext2 = splitting_extend(cb2, nu, RngStream{14, 0});
  double v0 = 0.0, v1 = 0.0;
  for (int i = 1; i < ext2.size(); ++i) {
    v0 += ext2.row(i)[0] * ext2.row(i)[0];
    v1 += ext2.row(i)[1] * ext2.row(i)[1];
  }
  // d=2 doubles each coordinate variance
  CHECK(v0 / nu == doctest::Approx(2.0 * 0.4).epsilon(0.03));
  CHECK(v1 / nu == doctest::Approx(2.0 * 0.1).epsilon(0.03));
}

TEST_CASE("estimate_distortion_weights companions") {
  // single codeword at the origin: distortion is the trace
  auto cb1 = make_codebook({0.4, 0.04, 0.016}, {0.0, 0.0, 0.0}, 3);
  const std::uint64_t S = 400'000;
  auto out = estimate_distortion_weights(cb1, S, RngStream{15, 0});
  CHECK(out.weights[0] == 1.0);
  CHECK(std::abs(out.distortion - 0.456) <= 3.0 * out.meta.distortion_se);

  // symmetric two-point book: equal weights, weights sum exactly to one
  const double root = std::sqrt(2.0 / 3.14159265358979323846);
  auto cb2 = make_codebook({1.0}, {-root, root}, 1);
  auto est = estimate_distortion_weights(cb2, S, RngStream{16, 0});
  CHECK(est.weights[0] + est.weights[1] == 1.0);
  CHECK(std::abs(est.weights[0] - 0.5) < 3.0 * std::sqrt(0.25 / S));
  // stationary grid: Pythagoras via the pass statistic
  CHECK(std::abs(est.meta.second_moment_plus_dist - 1.0) <=
        4.0 * est.meta.second_moment_plus_dist_se);
}

TEST_CASE("exact Pythagoras identity for a 1-D stationary codebook") {
  // scalar quantizer transplanted into the weighted-norm setting
  const double lambda = 0.405284734569351;
  const auto sq = optimal_normal_quantizer(5);
  Codebook cb;
  cb.dim = 1;
  cb.norm.lambdas = {lambda};
  cb.points = sq.points;
  cb.weights = sq.weights;
  cb.distortion = lambda * sq.distortion;
  double second = 0.0;
  for (int i = 0; i < 5; ++i) second += cb.weights[i] * lambda * cb.points[i] * cb.points[i];
  CHECK(second + cb.distortion == doctest::Approx(lambda).epsilon(1e-8));
}

TEST_CASE("optimize_pipeline: trivial level") {
  CovNorm norm{{0.4, 0.04}};
  const auto cb = optimize_pipeline(1, norm, OptSchedule::quick(), RngStream{17, 0});
  CHECK(cb.size() == 1);
  CHECK(cb.points == std::vector<double>{0.0, 0.0});
  CHECK(cb.distortion == doctest::Approx(0.44));
  CHECK(cb.weights == std::vector<double>{1.0});
}

TEST_CASE("optimize_pipeline: N=10 under the Brownian norm hits the published band") {
  const KLSystem sys{GaussianProcess::BrownianMotion, 1.0};
  const int N = 10;
  const auto cb = optimize_pipeline(N, sys.cov_norm(2), OptSchedule::quick(), RngStream{18, 0});
  const double full = cb.distortion + sys.eigen_tail(2);
  const double val = std::log(static_cast<double>(N)) * full;
  CHECK(val > 0.20);
  CHECK(val < 0.26);
  CHECK(cb.meta.stationarity_residual < 0.05);

  // distortion history is non-increasing across splitting levels within noise
  const auto& h = cb.meta.history;
  REQUIRE(h.size() >= 2);
  for (std::size_t l = 1; l < h.size(); ++l)
    CHECK(h[l].distortion <= h[l - 1].distortion + 3.0 * (h[l].se + h[l - 1].se));

  // duplicate run reproduces bit-identically
  const auto cb2 = optimize_pipeline(N, sys.cov_norm(2), OptSchedule::quick(), RngStream{18, 0});
  CHECK(cb2.points == cb.points);
  CHECK(cb2.distortion == cb.distortion);
}

TEST_CASE("lloyd rejects sample starvation") {
  auto cb = make_codebook({1.0}, {-1.0, 1.0}, 1);
  CHECK_THROWS_AS(lloyd_randomized(cb, 1, 1, RngStream{19, 0}), std::invalid_argument);
}
