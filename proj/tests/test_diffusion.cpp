#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fquant/diffusion.hpp"
#include "fquant/kl_basis.hpp"

using namespace fquant;

namespace {
const KLSystem kBm{GaussianProcess::BrownianMotion, 1.0};

ScalarDiffusionSpec ou_spec(double k, double sigma, double x0) {
  ScalarDiffusionSpec s;
  s.x0 = x0;
  s.drift = [k](double, double x) { return -k * x; };
  s.diffusion = [sigma](double, double) { return sigma; };
  s.diffusion_dx = [](double, double) { return 0.0; };
  return s;
}

std::vector<double> chi_row(const FunctionalQuantizer& fq, int i) {
  std::vector<double> chi(fq.dim);
  for (int l = 0; l < fq.dim; ++l)
    chi[l] = fq.row(i)[l] / std::sqrt(fq.system.eigenvalue(l + 1));
  return chi;
}
}  // namespace

TEST_CASE("additive noise integrates the codeword path exactly") {
  // b = 0, theta = sigma: x(t) = x0 + sigma w_i(t)
  const auto fq = build_product_fq(10, kBm);
  ScalarDiffusionSpec spec;
  spec.x0 = 0.7;
  spec.drift = [](double, double) { return 0.0; };
  spec.diffusion = [](double, double) { return 0.4; };
  spec.diffusion_dx = [](double, double) { return 0.0; };
  const int n = 512;
  const auto e = quantize_scalar_diffusion(spec, fq, n);
  CHECK(e.weights == fq.weights);  // weights pass through untouched
  for (int i = 0; i < e.size(); ++i) {
    CHECK(e.path(i)[0] == 0.7);
    for (int j = 0; j <= n; ++j) {
      const double expect = 0.7 + 0.4 * fq.path_value(i, e.tgrid[j]);
      CHECK(std::abs(e.path(i)[j] - expect) < 1e-10);
    }
  }
}

TEST_CASE("OU quantization matches the closed form") {
  const double k = 1.0, sigma = 0.3, x0 = 0.5;
  const auto fq = build_product_fq(100, kBm);  // 96 codewords
  const int n = 1000;
  const auto e = quantize_scalar_diffusion(ou_spec(k, sigma, x0), fq, n);
  double sup = 0.0;
  for (int i = 0; i < e.size(); ++i) {
    const auto closed = ou_closed_form(k, sigma, x0, chi_row(fq, i), 1.0, e.tgrid);
    for (int j = 0; j <= n; ++j) sup = std::max(sup, std::abs(e.path(i)[j] - closed[j]));
  }
  CHECK(sup < 1e-4);

  // deterministic relaxation when all coordinates vanish
  const auto zero = ou_closed_form(k, sigma, x0, std::vector<double>{0.0, 0.0}, 1.0, e.tgrid);
  for (int j = 0; j <= n; ++j)
    CHECK(zero[j] == doctest::Approx(x0 * std::exp(-e.tgrid[j])).epsilon(1e-14));
  CHECK(zero[0] == doctest::Approx(x0).epsilon(1e-15));  // phi_l(0) = 0
}

TEST_CASE("RK4 step-halving gains a factor near 16 on the OU system") {
  const double k = 1.0, sigma = 0.3, x0 = 0.5;
  const auto fq = build_product_fq(100, kBm);
  double sup32 = 0.0, sup64 = 0.0;
  for (int n : {32, 64}) {
    const auto e = quantize_scalar_diffusion(ou_spec(k, sigma, x0), fq, n);
    double sup = 0.0;
    for (int i = 0; i < e.size(); ++i) {
      const auto closed = ou_closed_form(k, sigma, x0, chi_row(fq, i), 1.0, e.tgrid);
      for (int j = 0; j <= n; ++j) sup = std::max(sup, std::abs(e.path(i)[j] - closed[j]));
    }
    (n == 32 ? sup32 : sup64) = sup;
  }
  const double ratio = sup32 / sup64;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("OU closed form is continuous in k near zero") {
  const auto fq = build_product_fq(10, kBm);
  const int n = 256;
  ScalarDiffusionSpec spec;
  spec.x0 = 0.0;
  spec.drift = [](double, double) { return 0.0; };
  spec.diffusion = [](double, double) { return 1.0; };
  spec.diffusion_dx = [](double, double) { return 0.0; };
  const auto e = quantize_scalar_diffusion(spec, fq, n);
  for (int i = 0; i < e.size(); ++i) {
    const auto almost = ou_closed_form(1e-4, 1.0, 0.0, chi_row(fq, i), 1.0, e.tgrid);
    for (int j = 0; j <= n; ++j) CHECK(std::abs(almost[j] - e.path(i)[j]) < 1e-3);
  }
}

TEST_CASE("geometric dynamics reproduce the Doss solution") {
  // theta(x) = x, b = mu x: x(t) = x0 exp((mu - 1/2) t + w(t))
  const double mu = 0.06, x0 = 1.0;
  ScalarDiffusionSpec spec;
  spec.x0 = x0;
  spec.drift = [mu](double, double x) { return mu * x; };
  spec.diffusion = [](double, double x) { return x; };
  spec.diffusion_dx = [](double, double) { return 1.0; };
  const auto fq = build_product_fq(10, kBm);
  const int n = 1000;
  const auto e = quantize_scalar_diffusion(spec, fq, n);
  for (int i = 0; i < e.size(); ++i) {
    for (int j = 0; j <= n; ++j) {
      const double t = e.tgrid[j];
      const double expect = x0 * std::exp((mu - 0.5) * t + fq.path_value(i, t));
      CHECK(std::abs(e.path(i)[j] - expect) < 1e-8);
    }
  }
}

TEST_CASE("vol quantizer reduces to the linear flow when theta = 0") {
  const double k = 2.0, a = 0.04, v0 = 0.1;
  const auto fq = build_product_fq(10, kBm);
  const auto vq = heston_vol_quantizer({k, a, 0.0, v0, 0.0}, fq, 128);
  for (int i = 0; i < vq.ensemble.size(); ++i)
    for (int j = 0; j <= 128; ++j) {
      const double t = vq.ensemble.tgrid[j];
      CHECK(std::abs(vq.ensemble.path(i)[j] - (a + (v0 - a) * std::exp(-k * t))) < 1e-8);
    }
}

TEST_CASE("vol quantizer zero-codeword path follows the shifted mean level") {
  const double k = 2.0, a = 0.01, theta = 0.1, v0 = 0.1;
  const auto fq1 = build_product_fq(1, kBm);  // single zero path
  const auto vq = heston_vol_quantizer({k, a, theta, v0, 0.0}, fq1, 128);
  const double level = a - theta * theta / (4.0 * k);
  for (int j = 0; j <= 128; ++j) {
    const double t = vq.ensemble.tgrid[j];
    const double expect = level + (v0 - level) * std::exp(-k * t);
    CHECK(std::abs(vq.ensemble.path(0)[j] - expect) < 1e-8);
  }
  // running integral of the closed form, also to quadrature accuracy
  for (int j = 0; j <= 128; ++j) {
    const double t = vq.ensemble.tgrid[j];
    const double expect = level * t + (v0 - level) * (1.0 - std::exp(-k * t)) / k;
    CHECK(std::abs(vq.ybar(0)[j] - expect) < 1e-8);
  }
}

TEST_CASE("vol paths stay positive at the benchmark parameters") {
  const auto fq = build_product_fq(400, kBm);
  const auto vq = heston_vol_quantizer({2.0, 0.01, 0.1, 0.1, 0.0}, fq, 32);
  double min_y = 1e300;
  for (int i = 0; i < vq.ensemble.size(); ++i)
    for (int j = 0; j <= 32; ++j) min_y = std::min(min_y, vq.ensemble.path(i)[j]);
  CHECK(min_y > 0.0);
  CHECK(vq.ensemble.weights == fq.weights);
}

TEST_CASE("quantized stochastic integral building blocks") {
  const auto fq = build_product_fq(10, kBm);
  const int n = 512;
  const auto tgrid = uniform_grid(1.0, n);
  std::vector<double> ypath(n + 1, 0.09);  // constant y = c

  for (int i = 0; i < fq.size(); ++i) {
    const std::span<const double> row(fq.row(i), fq.dim);
    const auto zero = quantized_stochastic_integral([](double) { return 0.0; }, ypath,
                                                    fq.system, row, tgrid);
    for (double v : zero) CHECK(v == 0.0);

    // g = 1 integrates the derivative back to the path increment
    const auto unit = quantized_stochastic_integral([](double) { return 1.0; }, ypath,
                                                    fq.system, row, tgrid);
    for (int j = 0; j <= n; ++j)
      CHECK(std::abs(unit[j] - fq.path_value(i, tgrid[j])) < 1e-8);

    // g = sqrt(y) with constant y scales the increment
    const auto scaled = quantized_stochastic_integral(
        [](double y) { return std::sqrt(y); }, ypath, fq.system, row, tgrid);
    for (int j = 0; j <= n; ++j)
      CHECK(std::abs(scaled[j] - 0.3 * fq.path_value(i, tgrid[j])) < 1e-8);
  }
}

TEST_CASE("solver guards") {
  CHECK_THROWS_AS(heston_vol_quantizer({2.0, 0.01, 0.5, 0.1, 0.0}, build_product_fq(4, kBm), 32),
                  std::invalid_argument);  // Feller-type bound violated
  ScalarDiffusionSpec explosive;
  explosive.x0 = 1.0;
  explosive.drift = [](double, double x) { return x * x * x * 1e8; };
  explosive.diffusion = [](double, double) { return 0.0; };
  explosive.diffusion_dx = [](double, double) { return 0.0; };
  CHECK_THROWS_AS(quantize_scalar_diffusion(explosive, build_product_fq(4, kBm), 16), SolverError);
}
