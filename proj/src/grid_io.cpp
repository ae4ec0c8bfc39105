#include "fquant/grid_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fquant/gaussian.hpp"

namespace fquant {

using nlohmann::json;

namespace {

std::uint32_t crc_table_entry(std::uint32_t i) {
  std::uint32_t c = i;
  for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
  return c;
}

const std::array<std::uint32_t, 256>& crc_table() {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) t[i] = crc_table_entry(i);
    return t;
  }();
  return table;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::string& out, std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += fmt(v[i]);
  }
  out += '\n';
}

void write_file(const std::filesystem::path& path, const std::string& kind, const json& meta,
                const std::string& payload, std::size_t n_values) {
  std::string head = "FQGRID 1\nkind " + kind + "\nmeta " + meta.dump() + "\npayload " +
                     std::to_string(n_values) + "\n";
  const std::uint32_t crc =
      crc32({reinterpret_cast<const unsigned char*>(payload.data()), payload.size()});
  char crcbuf[16];
  std::snprintf(crcbuf, sizeof crcbuf, "%08x", crc);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw GridIoError("cannot open for writing: " + path.string());
  f << head << payload << "checksum " << crcbuf << "\n";
  if (!f) throw GridIoError("write failed: " + path.string());
}

struct RawGrid {
  std::string kind;
  json meta;
  std::vector<double> values;
};

RawGrid read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw GridIoError("cannot open: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();

  auto next_line = [&](std::size_t& pos) {
    const std::size_t e = text.find('\n', pos);
    if (e == std::string::npos) throw GridIoError("truncated grid file: " + path.string());
    std::string line = text.substr(pos, e - pos);
    pos = e + 1;
    return line;
  };

  std::size_t pos = 0;
  const std::string magic = next_line(pos);
  if (magic.rfind("FQGRID", 0) != 0) throw GridIoError("bad magic in " + path.string());
  if (magic != "FQGRID 1") throw VersionError("unsupported grid version: " + magic);

  const std::string kind_line = next_line(pos);
  if (kind_line.rfind("kind ", 0) != 0) throw GridIoError("missing kind line");
  const std::string meta_line = next_line(pos);
  if (meta_line.rfind("meta ", 0) != 0) throw GridIoError("missing meta line");
  const std::string payload_line = next_line(pos);
  if (payload_line.rfind("payload ", 0) != 0) throw GridIoError("missing payload line");
  const std::size_t n_values = std::stoull(payload_line.substr(8));

  const std::size_t csum_pos = text.rfind("checksum ");
  if (csum_pos == std::string::npos || csum_pos < pos)
    throw GridIoError("missing checksum line");
  const std::string payload = text.substr(pos, csum_pos - pos);
  const std::uint32_t stored =
      static_cast<std::uint32_t>(std::stoul(text.substr(csum_pos + 9), nullptr, 16));
  const std::uint32_t actual =
      crc32({reinterpret_cast<const unsigned char*>(payload.data()), payload.size()});
  if (stored != actual) throw ChecksumError("checksum mismatch in " + path.string());

  RawGrid raw;
  raw.kind = kind_line.substr(5);
  raw.meta = json::parse(meta_line.substr(5));
  raw.values.reserve(n_values);
  const char* p = payload.c_str();
  char* end = nullptr;
  for (std::size_t i = 0; i < n_values; ++i) {
    const double v = std::strtod(p, &end);
    if (end == p) throw GridIoError("payload shorter than declared in " + path.string());
    raw.values.push_back(v);
    p = end;
  }
  return raw;
}

void check_weights(std::span<const double> w, double tol, const char* field) {
  double s = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw InvariantError(field, "weights must be >= 0");
    s += x;
  }
  if (std::abs(s - 1.0) > tol) throw InvariantError(field, "weights sum to " + fmt(s));
}

void validate_scalar(const ScalarQuantizer& q) {
  const int M = q.size();
  if (M < 1 || static_cast<int>(q.weights.size()) != M)
    throw InvariantError("points/weights", "size mismatch");
  for (int i = 1; i < M; ++i)
    if (!(q.points[i] > q.points[i - 1]))
      throw InvariantError("points", "not strictly increasing");
  for (double w : q.weights)
    if (!(w > 0.0)) throw InvariantError("weights", "non-positive cell weight");
  check_weights(q.weights, 1e-12, "weights");

  if (q.law == ScalarLaw::StdNormal) {
    // Recompute the companion quantities from the closed-form cell integrals.
    double dist = 0.0, res = 0.0;
    const auto b = q.cell_bounds();
    for (int i = 0; i < M; ++i) {
      const auto cm = gaussian_cell_moments(b[i], b[i + 1]);
      res = std::max(res, std::abs(q.points[i] - cm.mean_part / cm.mass));
      dist += cm.second_part - 2.0 * q.points[i] * cm.mean_part +
              q.points[i] * q.points[i] * cm.mass;
    }
    if (res >= 1e-10) throw InvariantError("points", "stationarity residual " + fmt(res));
    if (std::abs(dist - q.distortion) > 1e-10)
      throw InvariantError("distortion", "inconsistent with cell integrals by " +
                                             fmt(dist - q.distortion));
  } else {
    if (!(q.a < q.b)) throw InvariantError("a/b", "requires a < b");
    for (int k = 1; k <= M; ++k) {
      const double expect = q.a + (2.0 * k - 1.0) * (q.b - q.a) / (2.0 * M);
      if (std::abs(q.points[k - 1] - expect) > 1e-12 * std::max(1.0, std::abs(expect)))
        throw InvariantError("points", "not the uniform midpoint grid");
    }
    const double expect = (q.b - q.a) * (q.b - q.a) / (12.0 * M * M);
    if (std::abs(q.distortion - expect) > 1e-12 * expect)
      throw InvariantError("distortion", "inconsistent with closed form");
  }
}

void check_matrix_finite(std::span<const double> v, const char* field) {
  for (double x : v)
    if (!std::isfinite(x)) throw InvariantError(field, "non-finite entry");
}

void check_no_duplicate_rows(std::span<const double> pts, int n, int d, const char* field) {
  for (int i = 0; i < n; ++i) {
    const double* a = pts.data() + static_cast<std::size_t>(i) * d;
    for (int j = i + 1; j < n; ++j) {
      const double* b = pts.data() + static_cast<std::size_t>(j) * d;
      int k = 0;
      while (k < d && a[k] == b[k]) ++k;
      if (k == d) throw InvariantError(field, "duplicate codewords " + std::to_string(i) + "," +
                                                  std::to_string(j));
    }
  }
}

void validate_codebook(const Codebook& cb) {
  const int n = cb.size(), d = cb.dim;
  if (n < 1 || d < 1 || static_cast<int>(cb.weights.size()) != n)
    throw InvariantError("points/weights", "size mismatch");
  cb.norm.validate();
  if (cb.norm.dim() != d) throw InvariantError("norm", "dimension mismatch");
  check_matrix_finite(cb.points, "points");
  check_weights(cb.weights, 1e-9, "weights");
  if (!(cb.distortion >= 0.0)) throw InvariantError("distortion", "negative");
  check_no_duplicate_rows(cb.points, n, d, "points");
}

void validate_functional(const FunctionalQuantizer& fq) {
  const int n = fq.size(), d = fq.dim;
  if (n < 1 || d < 0 || static_cast<int>(fq.coeffs.size()) != n * d)
    throw InvariantError("coeffs/weights", "size mismatch");
  check_matrix_finite(fq.coeffs, "coeffs");
  check_weights(fq.weights, 1e-9, "weights");
  const double tail = fq.system.eigen_tail(d);
  const double gap = fq.quant_error * fq.quant_error - fq.fin_dim_distortion - tail;
  if (std::abs(gap) > 1e-10 * std::max(1.0, fq.quant_error * fq.quant_error))
    throw InvariantError("quant_error", "squared error != finite-dim distortion + tail");
}

void validate_ensemble(const QuantizedPathEnsemble& e) {
  const int n = e.size();
  const std::size_t L = e.tgrid.size();
  if (n < 1 || L < 2 || e.paths.size() != static_cast<std::size_t>(n) * L)
    throw InvariantError("paths", "size mismatch");
  for (std::size_t j = 1; j < L; ++j)
    if (!(e.tgrid[j] > e.tgrid[j - 1])) throw InvariantError("tgrid", "not increasing");
  check_matrix_finite(e.paths, "paths");
  check_weights(e.weights, 1e-9, "weights");
}

GaussianProcess process_from(const std::string& s) {
  if (s == "bm") return GaussianProcess::BrownianMotion;
  if (s == "bridge") return GaussianProcess::BrownianBridge;
  throw GridIoError("unknown process: " + s);
}

std::string process_name(GaussianProcess p) {
  return p == GaussianProcess::BrownianMotion ? "bm" : "bridge";
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
  const auto& t = crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (unsigned char b : bytes) c = t[(c ^ b) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::string RunConfig::digest() const {
  std::string s = command;
  s += '\0';
  for (const auto& [k, v] : params) {
    s += k;
    s += '=';
    s += v;
    s += '\0';
  }
  s += "seed=" + std::to_string(seed);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001B3ULL;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void save_grid(const std::filesystem::path& path, const ScalarQuantizer& q,
               const std::string& config_digest) {
  validate_scalar(q);
  json meta;
  meta["law"] = q.law == ScalarLaw::StdNormal ? "normal" : "uniform";
  meta["M"] = q.size();
  meta["a"] = q.a;
  meta["b"] = q.b;
  meta["distortion"] = q.distortion;
  meta["iterations"] = q.iterations;
  meta["residual"] = q.residual;
  meta["config"] = config_digest;
  std::string payload;
  write_row(payload, q.points);
  write_row(payload, q.weights);
  write_file(path, "scalar", meta, payload, 2 * q.points.size());
}

void save_grid(const std::filesystem::path& path, const Codebook& cb,
               const std::string& config_digest) {
  validate_codebook(cb);
  json meta;
  meta["N"] = cb.size();
  meta["d"] = cb.dim;
  meta["lambdas"] = cb.norm.lambdas;
  meta["distortion"] = cb.distortion;
  meta["seed"] = cb.meta.seed;
  meta["schedule"] = cb.meta.schedule_digest;
  meta["stationarity_residual"] = cb.meta.stationarity_residual;
  meta["distortion_se"] = cb.meta.distortion_se;
  meta["q_mean"] = cb.meta.second_moment_plus_dist;
  meta["q_se"] = cb.meta.second_moment_plus_dist_se;
  meta["estimate_samples"] = cb.meta.estimate_samples;
  meta["clvq_steps"] = cb.meta.clvq_steps;
  meta["lloyd_iterations"] = cb.meta.lloyd_iterations;
  meta["samples_used"] = cb.meta.samples_used;
  meta["empty_cell_reseeds"] = cb.meta.empty_cell_reseeds;
  meta["config"] = config_digest;
  std::string payload;
  for (int i = 0; i < cb.size(); ++i)
    write_row(payload, std::span<const double>(cb.row(i), cb.dim));
  write_row(payload, cb.weights);
  write_file(path, "codebook", meta, payload, cb.points.size() + cb.weights.size());
}

void save_grid(const std::filesystem::path& path, const FunctionalQuantizer& fq,
               const std::string& config_digest) {
  validate_functional(fq);
  json meta;
  meta["process"] = process_name(fq.system.process);
  meta["T"] = fq.system.T;
  meta["N"] = fq.size();
  meta["d"] = fq.dim;
  meta["mode"] = fq.mode;
  meta["allocation"] = fq.allocation;
  meta["quant_error"] = fq.quant_error;
  meta["fin_dim_distortion"] = fq.fin_dim_distortion;
  meta["seed"] = fq.meta.seed;
  meta["schedule"] = fq.meta.schedule_digest;
  meta["stationarity_residual"] = fq.meta.stationarity_residual;
  meta["distortion_se"] = fq.meta.distortion_se;
  meta["q_mean"] = fq.meta.second_moment_plus_dist;
  meta["q_se"] = fq.meta.second_moment_plus_dist_se;
  meta["estimate_samples"] = fq.meta.estimate_samples;
  meta["config"] = config_digest;
  std::string payload;
  for (int i = 0; i < fq.size(); ++i)
    write_row(payload, std::span<const double>(fq.row(i), fq.dim));
  write_row(payload, fq.weights);
  write_file(path, "functional", meta, payload, fq.coeffs.size() + fq.weights.size());
}

void save_grid(const std::filesystem::path& path, const QuantizedPathEnsemble& e,
               const std::string& config_digest) {
  validate_ensemble(e);
  json meta;
  meta["N"] = e.size();
  meta["L"] = e.grid_size();
  meta["provenance"] = e.provenance;
  meta["config"] = config_digest;
  std::string payload;
  write_row(payload, e.tgrid);
  for (int i = 0; i < e.size(); ++i)
    write_row(payload, std::span<const double>(e.path(i), e.tgrid.size()));
  write_row(payload, e.weights);
  write_file(path, "ensemble", meta, payload,
             e.tgrid.size() + e.paths.size() + e.weights.size());
}

std::string grid_kind(const std::filesystem::path& path) { return read_file(path).kind; }

ScalarQuantizer load_scalar(const std::filesystem::path& path) {
  const RawGrid raw = read_file(path);
  if (raw.kind != "scalar") throw GridIoError("expected scalar grid, got " + raw.kind);
  ScalarQuantizer q;
  const std::string law = raw.meta.at("law");
  q.law = law == "normal" ? ScalarLaw::StdNormal : ScalarLaw::Uniform;
  const int M = raw.meta.at("M");
  q.a = raw.meta.at("a");
  q.b = raw.meta.at("b");
  q.distortion = raw.meta.at("distortion");
  q.iterations = raw.meta.at("iterations");
  q.residual = raw.meta.at("residual");
  if (static_cast<int>(raw.values.size()) != 2 * M)
    throw GridIoError("scalar payload size mismatch");
  q.points.assign(raw.values.begin(), raw.values.begin() + M);
  q.weights.assign(raw.values.begin() + M, raw.values.end());
  validate_scalar(q);
  return q;
}

Codebook load_codebook(const std::filesystem::path& path) {
  const RawGrid raw = read_file(path);
  if (raw.kind != "codebook") throw GridIoError("expected codebook grid, got " + raw.kind);
  Codebook cb;
  const int N = raw.meta.at("N");
  cb.dim = raw.meta.at("d");
  cb.norm.lambdas = raw.meta.at("lambdas").get<std::vector<double>>();
  cb.distortion = raw.meta.at("distortion");
  cb.meta.seed = raw.meta.at("seed");
  cb.meta.schedule_digest = raw.meta.at("schedule");
  cb.meta.stationarity_residual = raw.meta.at("stationarity_residual");
  cb.meta.distortion_se = raw.meta.at("distortion_se");
  cb.meta.second_moment_plus_dist = raw.meta.at("q_mean");
  cb.meta.second_moment_plus_dist_se = raw.meta.at("q_se");
  cb.meta.estimate_samples = raw.meta.at("estimate_samples");
  cb.meta.clvq_steps = raw.meta.at("clvq_steps");
  cb.meta.lloyd_iterations = raw.meta.at("lloyd_iterations");
  cb.meta.samples_used = raw.meta.at("samples_used");
  cb.meta.empty_cell_reseeds = raw.meta.at("empty_cell_reseeds");
  if (static_cast<int>(raw.values.size()) != N * cb.dim + N)
    throw GridIoError("codebook payload size mismatch");
  cb.points.assign(raw.values.begin(), raw.values.begin() + static_cast<std::size_t>(N) * cb.dim);
  cb.weights.assign(raw.values.begin() + static_cast<std::size_t>(N) * cb.dim, raw.values.end());
  validate_codebook(cb);
  return cb;
}

FunctionalQuantizer load_functional(const std::filesystem::path& path) {
  const RawGrid raw = read_file(path);
  if (raw.kind != "functional") throw GridIoError("expected functional grid, got " + raw.kind);
  FunctionalQuantizer fq;
  fq.system.process = process_from(raw.meta.at("process"));
  fq.system.T = raw.meta.at("T");
  const int N = raw.meta.at("N");
  fq.dim = raw.meta.at("d");
  fq.mode = raw.meta.at("mode");
  fq.allocation = raw.meta.at("allocation").get<std::vector<int>>();
  fq.quant_error = raw.meta.at("quant_error");
  fq.fin_dim_distortion = raw.meta.at("fin_dim_distortion");
  fq.meta.seed = raw.meta.at("seed");
  fq.meta.schedule_digest = raw.meta.at("schedule");
  fq.meta.stationarity_residual = raw.meta.at("stationarity_residual");
  fq.meta.distortion_se = raw.meta.at("distortion_se");
  fq.meta.second_moment_plus_dist = raw.meta.at("q_mean");
  fq.meta.second_moment_plus_dist_se = raw.meta.at("q_se");
  fq.meta.estimate_samples = raw.meta.at("estimate_samples");
  if (static_cast<int>(raw.values.size()) != N * fq.dim + N)
    throw GridIoError("functional payload size mismatch");
  fq.coeffs.assign(raw.values.begin(),
                   raw.values.begin() + static_cast<std::size_t>(N) * fq.dim);
  fq.weights.assign(raw.values.begin() + static_cast<std::size_t>(N) * fq.dim, raw.values.end());
  validate_functional(fq);
  return fq;
}

QuantizedPathEnsemble load_ensemble(const std::filesystem::path& path) {
  const RawGrid raw = read_file(path);
  if (raw.kind != "ensemble") throw GridIoError("expected ensemble grid, got " + raw.kind);
  QuantizedPathEnsemble e;
  const int N = raw.meta.at("N");
  const int L = raw.meta.at("L");
  e.provenance = raw.meta.at("provenance");
  if (static_cast<int>(raw.values.size()) != L + N * L + N)
    throw GridIoError("ensemble payload size mismatch");
  auto it = raw.values.begin();
  e.tgrid.assign(it, it + L);
  it += L;
  e.paths.assign(it, it + static_cast<std::size_t>(N) * L);
  it += static_cast<std::size_t>(N) * L;
  e.weights.assign(it, raw.values.end());
  validate_ensemble(e);
  return e;
}

std::filesystem::path grid_store_dir() {
  if (const char* env = std::getenv("FQUANT_GRID_DIR")) return env;
  return "grids";
}

}  // namespace fquant
