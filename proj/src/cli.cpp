#include "fquant/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fquant/cubature.hpp"
#include "fquant/diffusion.hpp"
#include "fquant/grid_io.hpp"
#include "fquant/heston.hpp"
#include "fquant/kl_basis.hpp"
#include "fquant/reproduce.hpp"

namespace fquant {

namespace {

double now_sec() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string sizes_str(const std::vector<int>& sizes) {
  if (sizes.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(sizes[i]);
  }
  return s;
}

std::vector<double> parse_strikes(const std::string& spec) {
  // "a:b:step" or a single value
  std::vector<double> ks;
  double a, b, step = 1.0;
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) {
    ks.push_back(std::stod(spec));
    return ks;
  }
  a = std::stod(spec.substr(0, c1));
  const auto rest = spec.substr(c1 + 1);
  const auto c2 = rest.find(':');
  if (c2 == std::string::npos) {
    b = std::stod(rest);
  } else {
    b = std::stod(rest.substr(0, c2));
    step = std::stod(rest.substr(c2 + 1));
  }
  for (double K = a; K <= b + 1e-9; K += step) ks.push_back(K);
  return ks;
}

KLSystem system_from(const std::string& process, double T) {
  if (process == "bm") return {GaussianProcess::BrownianMotion, T};
  if (process == "bridge") return {GaussianProcess::BrownianBridge, T};
  throw std::invalid_argument("unknown process: " + process);
}

struct GlobalOpts {
  std::string grid_dir;
  std::uint64_t seed = 20070401;
  bool quick = false;
};

std::filesystem::path store_dir(const GlobalOpts& g) {
  return g.grid_dir.empty() ? grid_store_dir() : std::filesystem::path(g.grid_dir);
}

OptSchedule schedule_for(const GlobalOpts& g) {
  return g.quick ? OptSchedule::quick() : OptSchedule::defaults();
}

// Build-or-load an optimized Brownian quantizer; optimized grids are
// expensive, so they are cached in the store keyed by size/seed/schedule.
FunctionalQuantizer get_fq(const GlobalOpts& g, const std::string& process, double T, int N,
                           const std::string& mode) {
  const KLSystem sys = system_from(process, T);
  if (mode == "product") return build_product_fq(static_cast<std::uint64_t>(N), sys);
  if (mode != "optimal") throw std::invalid_argument("unknown mode: " + mode);
  const OptSchedule sched = schedule_for(g);
  char name[160];
  std::snprintf(name, sizeof name, "fq_%s_optimal_N%d_seed%llu_%s.fqg", process.c_str(), N,
                static_cast<unsigned long long>(g.seed), sched.digest().c_str());
  const auto path = store_dir(g) / name;
  if (std::filesystem::exists(path)) {
    auto fq = load_functional(path);
    if (fq.size() == N) return fq;
  }
  RunConfig cfg{"build-fq",
                {{"process", process},
                 {"T", std::to_string(T)},
                 {"N", std::to_string(N)},
                 {"mode", mode},
                 {"schedule", sched.digest()}},
                g.seed};
  auto fq = build_optimal_fq(N, sys, sched, RngStream{g.seed, 0});
  save_grid(path, fq, cfg.digest());
  return fq;
}

int cmd_scalar(const GlobalOpts& g, const std::string& law, int size, double a, double b,
               double tol, std::string out) {
  ScalarQuantizer q = law == "uniform" ? optimal_uniform_quantizer(a, b, size)
                                       : optimal_normal_quantizer(size, tol);
  RunConfig cfg{"scalar",
                {{"law", law},
                 {"size", std::to_string(size)},
                 {"a", std::to_string(a)},
                 {"b", std::to_string(b)},
                 {"tol", std::to_string(tol)}},
                g.seed};
  if (out.empty()) {
    char name[96];
    std::snprintf(name, sizeof name, "scalar_%s_M%d.fqg", law.c_str(), size);
    out = (store_dir(g) / name).string();
  }
  save_grid(out, q, cfg.digest());
  std::printf("scalar %s M=%d distortion=%.12g residual=%.3g -> %s\n", law.c_str(), size,
              q.distortion, q.residual, out.c_str());
  if (size <= 16) {
    std::printf("points:");
    for (double x : q.points) std::printf(" %.6f", x);
    std::printf("\n");
  }
  return 0;
}

int cmd_optimize(const GlobalOpts& g, int N, const std::string& lambdas_arg, double T,
                 std::string out) {
  CovNorm norm;
  std::string source = lambdas_arg;
  if (lambdas_arg == "bm" || lambdas_arg == "bridge") {
    norm = system_from(lambdas_arg, T).cov_norm(dimension_rule(N));
  } else {
    std::ifstream f(lambdas_arg);
    if (!f) throw std::invalid_argument("cannot open lambda file: " + lambdas_arg);
    double v;
    while (f >> v) norm.lambdas.push_back(v);
    source = "file:" + lambdas_arg;
  }
  const OptSchedule sched = schedule_for(g);
  RunConfig cfg{"optimize",
                {{"N", std::to_string(N)},
                 {"lambdas", source},
                 {"T", std::to_string(T)},
                 {"schedule", sched.digest()}},
                g.seed};
  const double t0 = now_sec();
  Codebook cb = optimize_pipeline(N, norm, sched, RngStream{g.seed, 0});
  const double dt = now_sec() - t0;
  if (out.empty()) {
    char name[128];
    std::snprintf(name, sizeof name, "codebook_N%d_d%d_seed%llu.fqg", N, cb.dim,
                  static_cast<unsigned long long>(g.seed));
    out = (store_dir(g) / name).string();
  }
  save_grid(out, cb, cfg.digest());
  std::printf("optimize N=%d d=%d distortion=%.8g (se %.2g) residual=%.3g reseeds=%d "
              "[%.1fs] -> %s\n",
              N, cb.dim, cb.distortion, cb.meta.distortion_se, cb.meta.stationarity_residual,
              cb.meta.empty_cell_reseeds, dt, out.c_str());
  return 0;
}

int cmd_build_fq(const GlobalOpts& g, const std::string& process, int N, const std::string& mode,
                 double T, std::string out) {
  const double t0 = now_sec();
  FunctionalQuantizer fq = get_fq(g, process, T, N, mode);
  const double dt = now_sec() - t0;
  RunConfig cfg{"build-fq",
                {{"process", process},
                 {"N", std::to_string(N)},
                 {"mode", mode},
                 {"T", std::to_string(T)}},
                g.seed};
  if (out.empty()) {
    char name[128];
    std::snprintf(name, sizeof name, "fq_%s_%s_N%d.fqg", process.c_str(), mode.c_str(), N);
    out = (store_dir(g) / name).string();
  }
  save_grid(out, fq, cfg.digest());
  std::printf("build-fq %s %s N=%d -> %d paths, d=%d, quant_error=%.6g [%.1fs] -> %s\n",
              process.c_str(), mode.c_str(), N, fq.size(), fq.dim, fq.quant_error, dt,
              out.c_str());
  if (fq.mode == "product") std::printf("allocation: %s\n", sizes_str(fq.allocation).c_str());
  return 0;
}

Functional builtin_functional(const std::string& name, double s0, double r, double sigma,
                              double K, double T) {
  if (name == "integral") return functional_integral();
  if (name == "squared-integral") return functional_squared_integral();
  if (name == "sup") return functional_sup();
  if (name == "asian-bs") return functional_asian_bs(s0, r, sigma, K, T);
  throw std::invalid_argument("unknown functional: " + name);
}

int cmd_cubature(const std::string& fq_file, const std::string& fname, int grid_points,
                 const std::string& romberg, double s0, double r, double sigma, double K) {
  if (!romberg.empty()) {
    const auto c = romberg.find(',');
    if (c == std::string::npos)
      throw std::invalid_argument("--romberg expects N1,N2");
    const int n1 = std::stoi(romberg.substr(0, c));
    const int n2 = std::stoi(romberg.substr(c + 1));
    const KLSystem sys{GaussianProcess::BrownianMotion, 1.0};
    const Functional F = builtin_functional(fname, s0, r, sigma, K, sys.T);
    const auto fq1 = build_product_fq(n1, sys);
    const auto fq2 = build_product_fq(n2, sys);
    const auto v1 = cubature(fq1, F, grid_points);
    const auto v2 = cubature(fq2, F, grid_points);
    const double ex = romberg_log_extrapolate({(double)n1, v1.value, fq1.quant_error},
                                              {(double)n2, v2.value, fq2.quant_error});
    std::printf("cubature %s: N=%d -> %.10g, N=%d -> %.10g, log-extrapolated %.10g\n",
                fname.c_str(), n1, v1.value, n2, v2.value, ex);
    return 0;
  }
  const auto fq = load_functional(fq_file);
  const Functional F = builtin_functional(fname, s0, r, sigma, K, fq.system.T);
  const auto res = cubature(fq, F, grid_points);
  if (res.error_bound)
    std::printf("cubature %s = %.10g (error bound %.3g)\n", fname.c_str(), res.value,
                *res.error_bound);
  else
    std::printf("cubature %s = %.10g\n", fname.c_str(), res.value);
  return 0;
}

int cmd_quantize_diffusion(const GlobalOpts& g, const std::string& model,
                           const std::string& fq_file, int steps, double x0, double k_rate,
                           double sigma, double mu, double a, std::string out) {
  const auto fq = load_functional(fq_file);
  QuantizedPathEnsemble e;
  if (model == "ou") {
    ScalarDiffusionSpec spec;
    spec.x0 = x0;
    spec.drift = [k_rate](double, double x) { return -k_rate * x; };
    spec.diffusion = [sigma](double, double) { return sigma; };
    spec.diffusion_dx = [](double, double) { return 0.0; };
    e = quantize_scalar_diffusion(spec, fq, steps);
    e.provenance = "ou k=" + std::to_string(k_rate) + " sigma=" + std::to_string(sigma);
  } else if (model == "gbm") {
    ScalarDiffusionSpec spec;
    spec.x0 = x0;
    spec.drift = [mu](double, double x) { return mu * x; };
    spec.diffusion = [sigma](double, double x) { return sigma * x; };
    spec.diffusion_dx = [sigma](double, double) { return sigma; };
    e = quantize_scalar_diffusion(spec, fq, steps);
    e.provenance = "gbm mu=" + std::to_string(mu) + " sigma=" + std::to_string(sigma);
  } else if (model == "heston-vol") {
    auto vq = heston_vol_quantizer({k_rate, a, sigma, x0, 0.0}, fq, steps);
    e = std::move(vq.ensemble);
  } else {
    throw std::invalid_argument("unknown model: " + model);
  }
  RunConfig cfg{"quantize-diffusion",
                {{"model", model}, {"fq", fq_file}, {"steps", std::to_string(steps)}},
                g.seed};
  if (out.empty()) {
    char name[128];
    std::snprintf(name, sizeof name, "ensemble_%s_N%d_n%d.fqg", model.c_str(), e.size(), steps);
    out = (store_dir(g) / name).string();
  }
  save_grid(out, e, cfg.digest());
  std::printf("quantize-diffusion %s: %d paths on %d steps -> %s\n", model.c_str(), e.size(),
              steps, out.c_str());
  return 0;
}

int cmd_price_asian(const GlobalOpts& g, const std::string& preset, int N, int M, int N2, int M2,
                    int steps, std::string strikes_spec, std::uint64_t mc_paths, int mc_steps,
                    const std::string& mode, const std::string& records) {
  HestonParams p = heston_preset(preset);
  std::vector<double> strikes =
      strikes_spec.empty() ? preset_strikes(preset) : parse_strikes(strikes_spec);

  const double t_load0 = now_sec();
  const auto fq1a = get_fq(g, "bm", p.T, N, mode);
  const auto fq2a = get_fq(g, "bm", p.T, M, mode);
  const auto fq1b = get_fq(g, "bm", p.T, N2, mode);
  const auto fq2b = get_fq(g, "bm", p.T, M2, mode);
  const double t_load = now_sec() - t_load0;

  const double t_fq0 = now_sec();
  const auto coarse = price_asian_fq(p, strikes, fq1a, fq2a, steps);
  const auto fine = price_asian_fq(p, strikes, fq1b, fq2b, steps);
  const auto interp = price_asian_interpolated(p, strikes, coarse, fine);
  const double t_fq = now_sec() - t_fq0;

  const auto mc = mc_reference(p, strikes, mc_paths, mc_steps, RngStream{g.seed ^ 0xAC5, 0});

  std::printf("# preset %s  s0=%g r=%g k=%g a=%g theta=%g rho=%g v0=%g T=%g\n", preset.c_str(),
              p.s0, p.r, p.k, p.a, p.theta, p.rho, p.v0, p.T);
  std::printf("# budgets (%d,%d) -> (%d,%d), dt=1/%d;  grid setup %.2fs, FQ pricing %.3fs, "
              "MC %.1fs (%llu paths)\n",
              N, M, N2, M2, steps, t_load, t_fq, mc.runtime_sec,
              static_cast<unsigned long long>(mc_paths));
  std::printf("%8s %12s %12s %12s %12s %10s %10s\n", "strike", "FQ", "FQ-Romberg", "interp",
              "MC", "MC s.e.", "abs diff");
  double max_diff = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t q = 0; q < strikes.size(); ++q) {
    const double romb = romberg_log_extrapolate({(double)N, coarse.calls[q], 0.0},
                                                {(double)N2, fine.calls[q], 0.0});
    const double diff = std::abs(interp.prices[q] - mc.prices[q]);
    max_diff = std::max(max_diff, diff);
    std::printf("%8.2f %12.4f %12.4f %12.4f %12.4f %10.2g %10.4f\n", strikes[q], fine.calls[q],
                romb, interp.prices[q], mc.prices[q], mc.std_errors[q], diff);
    rows.push_back({{"strike", strikes[q]},
                    {"fq", fine.calls[q]},
                    {"fq_romberg", romb},
                    {"interpolated", interp.prices[q]},
                    {"mc", mc.prices[q]},
                    {"mc_se", mc.std_errors[q]},
                    {"abs_diff", diff}});
  }
  std::printf("# max |interp - MC| = %.4f\n", max_diff);

  if (!records.empty()) {
    RunConfig cfg{"price-asian",
                  {{"preset", preset},
                   {"N", std::to_string(N)},
                   {"M", std::to_string(M)},
                   {"N2", std::to_string(N2)},
                   {"M2", std::to_string(M2)},
                   {"steps", std::to_string(steps)},
                   {"mode", mode},
                   {"mc_paths", std::to_string(mc_paths)}},
                  g.seed};
    nlohmann::json doc;
    doc["config"] = cfg.digest();
    doc["preset"] = preset;
    doc["rows"] = rows;
    std::ofstream f(records);
    f << doc.dump(2) << "\n";
    std::printf("# records -> %s\n", records.c_str());
  }
  return 0;
}

int cmd_reproduce(const GlobalOpts& g, const std::string& target) {
  if (target == "table-6-4") {
    const std::uint64_t budgets[] = {1, 10, 100, 1000, 10000};
    const double t0 = now_sec();
    const auto rows = reproduce_product_table(budgets);
    std::printf("%8s %8s %12s  %s\n", "N", "N_rec", "error", "allocation");
    for (const auto& r : rows)
      std::printf("%8llu %8llu %12.4f  %s\n", static_cast<unsigned long long>(r.budget),
                  static_cast<unsigned long long>(r.n_rec), r.error, sizes_str(r.sizes).c_str());
    std::printf("# %.2fs including scalar tabulation\n", now_sec() - t0);
    return 0;
  }
  if (target == "constant-opt") {
    const auto pts = reproduce_optimal_constant(160, schedule_for(g), RngStream{g.seed, 0});
    std::printf("%8s %4s %12s\n", "N", "d", "logN*e^2");
    for (const auto& pt : pts) std::printf("%8d %4d %12.5f\n", pt.N, pt.d, pt.log_n_e2);
    return 0;
  }
  if (target == "asian-heston") {
    return cmd_price_asian(g, "paper-2007", 400, 100, 1600, 400, 32, "", 1'000'000, 128,
                           "optimal", "");
  }
  throw std::invalid_argument("unknown reproduce target: " + target +
                              " (expected table-6-4, constant-opt or asian-heston)");
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"fquant -- functional quantization of Gaussian processes and quantized pricing"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--grid-dir", g.grid_dir, "grid store directory (env FQUANT_GRID_DIR)");
  app.add_option("--seed", g.seed, "base RNG seed");
  app.add_flag("--quick", g.quick, "light optimization budgets");

  // scalar
  auto* sc = app.add_subcommand("scalar", "optimal quantizer of a scalar law");
  sc->fallthrough();
  std::string sc_law = "normal", sc_out;
  int sc_size = 10;
  double sc_a = 0.0, sc_b = 1.0, sc_tol = 1e-12;
  sc->add_option("--law", sc_law, "normal|uniform")->check(CLI::IsMember({"normal", "uniform"}));
  sc->add_option("--size", sc_size, "number of codewords")->required()->check(CLI::PositiveNumber);
  sc->add_option("--a", sc_a, "uniform support left end");
  sc->add_option("--b", sc_b, "uniform support right end");
  sc->add_option("--tol", sc_tol, "stationarity tolerance");
  sc->add_option("--out", sc_out, "output grid file");

  // optimize
  auto* op = app.add_subcommand("optimize", "optimize a codebook under a covariance norm");
  op->fallthrough();
  int op_n = 10;
  std::string op_lambdas = "bm", op_out;
  double op_T = 1.0;
  op->add_option("--N", op_n, "codebook size")->required()->check(CLI::PositiveNumber);
  op->add_option("--lambdas", op_lambdas, "process name (bm|bridge) or file of eigenvalues");
  op->add_option("--T", op_T, "horizon");
  op->add_option("--out", op_out, "output grid file");

  // build-fq
  auto* bf = app.add_subcommand("build-fq", "build a functional quantizer");
  bf->fallthrough();
  std::string bf_process = "bm", bf_mode = "optimal", bf_out;
  int bf_n = 10;
  double bf_T = 1.0;
  bf->add_option("--process", bf_process, "bm|bridge")
      ->check(CLI::IsMember({"bm", "bridge"}));
  bf->add_option("--N", bf_n, "quantization level")->required()->check(CLI::PositiveNumber);
  bf->add_option("--mode", bf_mode, "optimal|product")
      ->check(CLI::IsMember({"optimal", "product"}));
  bf->add_option("--T", bf_T, "horizon");
  bf->add_option("--out", bf_out, "output grid file");

  // cubature
  auto* cu = app.add_subcommand("cubature", "quantized cubature of a path functional");
  cu->fallthrough();
  std::string cu_fq, cu_functional = "integral", cu_romberg;
  int cu_grid = 257;
  double cu_s0 = 100.0, cu_r = 0.1, cu_sigma = 0.2, cu_K = 100.0;
  cu->add_option("--fq", cu_fq, "functional quantizer grid file");
  cu->add_option("--functional", cu_functional,
                 "integral|squared-integral|sup|asian-bs");
  cu->add_option("--grid", cu_grid, "evaluation grid points (odd)");
  cu->add_option("--romberg", cu_romberg, "N1,N2 product budgets for log extrapolation");
  cu->add_option("--s0", cu_s0, "asian-bs spot");
  cu->add_option("--r", cu_r, "asian-bs rate");
  cu->add_option("--sigma", cu_sigma, "asian-bs volatility");
  cu->add_option("--K", cu_K, "asian-bs strike");

  // quantize-diffusion
  auto* qd = app.add_subcommand("quantize-diffusion", "quantize a diffusion codeword by codeword");
  qd->fallthrough();
  std::string qd_model = "ou", qd_fq, qd_out;
  int qd_steps = 32;
  double qd_x0 = 0.0, qd_k = 1.0, qd_sigma = 1.0, qd_mu = 0.0, qd_a = 0.01;
  qd->add_option("--model", qd_model, "ou|gbm|heston-vol")
      ->check(CLI::IsMember({"ou", "gbm", "heston-vol"}));
  qd->add_option("--fq", qd_fq, "driving Brownian quantizer grid file")->required();
  qd->add_option("--steps", qd_steps, "time steps");
  qd->add_option("--x0", qd_x0, "initial value");
  qd->add_option("--k", qd_k, "mean reversion speed");
  qd->add_option("--sigma", qd_sigma, "diffusion coefficient / vol of vol");
  qd->add_option("--mu", qd_mu, "gbm drift");
  qd->add_option("--a", qd_a, "heston-vol long-run level");
  qd->add_option("--out", qd_out, "output grid file");

  // price-asian
  auto* pa = app.add_subcommand("price-asian", "Asian call pricing by functional quantization");
  pa->fallthrough();
  std::string pa_model = "heston", pa_preset = "paper-2007", pa_strikes, pa_mode = "optimal",
              pa_records;
  int pa_N = 400, pa_M = 100, pa_N2 = 1600, pa_M2 = 400, pa_steps = 32, pa_mc_steps = 128;
  std::uint64_t pa_mc_paths = 1'000'000;
  pa->add_option("--model", pa_model, "heston")->check(CLI::IsMember({"heston"}));
  pa->add_option("--preset", pa_preset, "paper-2007|paper-2007-fig");
  pa->add_option("--N", pa_N, "W1 quantizer size, first budget");
  pa->add_option("--M", pa_M, "W2 quantizer size, first budget");
  pa->add_option("--N2", pa_N2, "W1 quantizer size, second budget");
  pa->add_option("--M2", pa_M2, "W2 quantizer size, second budget");
  pa->add_option("--steps", pa_steps, "ODE/averaging steps (1/dt)");
  pa->add_option("--strikes", pa_strikes, "a:b:step strike grid (preset default)");
  pa->add_option("--mc-paths", pa_mc_paths, "Monte Carlo reference trajectories");
  pa->add_option("--mc-steps", pa_mc_steps, "coarse Euler steps n (fine grid uses 2n)");
  pa->add_option("--mode", pa_mode, "optimal|product quantizers")
      ->check(CLI::IsMember({"optimal", "product"}));
  pa->add_option("--records", pa_records, "machine-readable output file");

  // reproduce
  auto* rp = app.add_subcommand("reproduce", "reproduce a published benchmark");
  rp->fallthrough();
  std::string rp_target;
  rp->add_option("target", rp_target, "table-6-4|constant-opt|asian-heston")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sc->parsed()) return cmd_scalar(g, sc_law, sc_size, sc_a, sc_b, sc_tol, sc_out);
    if (op->parsed()) return cmd_optimize(g, op_n, op_lambdas, op_T, op_out);
    if (bf->parsed()) return cmd_build_fq(g, bf_process, bf_n, bf_mode, bf_T, bf_out);
    if (cu->parsed())
      return cmd_cubature(cu_fq, cu_functional, cu_grid, cu_romberg, cu_s0, cu_r, cu_sigma, cu_K);
    if (qd->parsed())
      return cmd_quantize_diffusion(g, qd_model, qd_fq, qd_steps, qd_x0, qd_k, qd_sigma, qd_mu,
                                    qd_a, qd_out);
    if (pa->parsed())
      return cmd_price_asian(g, pa_preset, pa_N, pa_M, pa_N2, pa_M2, pa_steps, pa_strikes,
                             pa_mc_paths, pa_mc_steps, pa_mode, pa_records);
    if (rp->parsed()) return cmd_reproduce(g, rp_target);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fquant: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace fquant
