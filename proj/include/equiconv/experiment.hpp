#pragma once

// Experiment configuration, the per-mode drivers behind the CLI, and the
// uniform-ball sweep.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "asymptotics.hpp"
#include "expansion.hpp"
#include "io.hpp"
#include "operators.hpp"

namespace equiconv {

struct Tolerances {
  double biorth = 1e-6;            // max |(y_j, w_k) - delta_jk|
  double decay_ratio = 0.5;        // supnorm(m_last) / supnorm(m_first)
  double sine_poly_ratio = 0.1;    // same, for sine polynomials with vanishing tail
  double gamma_growth = 0.05;      // growth of sum gamma_n^2 over the last quarter of the range
  double psi2_ratio = 0.3;         // l1 proxy for psi_{n,2}
  double hardy_ratio = 1.25;
  double operator_bound = std::sqrt(2.0) + 0.05;
  double refinement = 0.02;        // relative change under grid doubling
  double identity = 1e-6;
  double sweep_chat_ratio = 5.0;   // max C_hat / median C_hat
  double vacuous = 1e-9;           // sup-norms below this count as zero
};

struct SweepConfig {
  double radius = 2.0;
  int count = 10;
  int cells = 16;
};

struct OperatorConfig {
  std::vector<int> m_list{8, 32, 128};
  std::vector<double> x_params{pi / 4, pi / 2, 3 * pi / 4};
  std::vector<int> tilde_m{8, 64};
  std::vector<int> hardy_m{16, 64, 256};
  std::vector<int> identity_m{8, 32};
};

struct ExperimentConfig {
  std::string mode = "equiconv";
  std::vector<L2Function> potentials;
  std::vector<L2Function> targets;
  int n_max = 64;
  std::vector<int> m_list{16, 32, 64, 128, 256};
  int grid_M = 4096;
  int conversion_K = default_conversion_k;
  Tolerances tol;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  SweepConfig sweep;
  OperatorConfig operators;
  int asym_lo = 8, asym_hi = 128;
  bool norm_bounds = false;  // hold ||S_m||, ||Atilde_{m,x}|| to tol.operator_bound
  bool strict = false;        // warnings fail the run
};

// ---------------------------------------------------------------------------
// Deterministic random numbers (platform independent).

inline double uniform01(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }
inline double uniform(std::mt19937_64& g, double lo, double hi) { return lo + (hi - lo) * uniform01(g); }

// sum_{k<=terms} a_k sin kx with a_k ~ U[-1, 1] / k, scaled to unit L2 norm.
inline L2Function random_sine_polynomial(int terms, std::uint64_t seed, std::string label = "random_sine") {
  std::mt19937_64 g(seed);
  std::vector<cplx> a;
  for (int k = 1; k <= terms; ++k) a.push_back(uniform(g, -1.0, 1.0) / k);
  L2Function f = make_sine_series(a, label);
  return scaled(f, 1.0 / l2_norm(f));
}

// Step function on `cells` uniform cells with values ~ U[-1, 1], rescaled to
// L2 norm r ~ U[0, R].
inline L2Function random_ball_potential(double R, int cells, std::mt19937_64& g, std::string label) {
  std::vector<cplx> v;
  for (int i = 0; i < cells; ++i) v.push_back(uniform(g, -1.0, 1.0));
  const double r = uniform(g, 0.0, R);
  const double n = l2_norm(L2Function{PiecewiseConstant{uniform_mesh(cells), v}, label});
  if (n > 0.0)
    for (auto& z : v) z *= r / n;
  return {PiecewiseConstant{uniform_mesh(cells), v}, label};
}

// chi_[0, pi/2], sin x, pi - 2x, a seeded 32-term sine polynomial and a
// degree-3 sine polynomial.
inline std::vector<L2Function> default_corpus(std::uint64_t seed) {
  return {make_indicator(pi / 2, "chi_half"),
          make_sine_series({1.0}, "sin_x"),
          L2Function{PiecewiseLinear{{0.0, pi}, {pi, -pi}}, "sawtooth"},
          random_sine_polynomial(32, seed, "random_sine32"),
          make_sine_series({1.0, 0.5, -0.25}, "sine_poly3")};
}

// Highest sine index in a sine-only polynomial, 0 otherwise.
inline int sine_degree(const L2Function& f) {
  auto* ff = std::get_if<FiniteFourier>(&f.kind());
  if (!ff || !ff->cosine.empty()) return 0;
  int d = 0;
  for (std::size_t k = 0; k < ff->sine.size(); ++k)
    if (ff->sine[k] != cplx(0.0)) d = int(k) + 1;
  return d;
}

// ---------------------------------------------------------------------------
// Config loading.

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::vector<std::string> known{"mode",       "potentials", "targets", "n_max",     "m_list",
                                                "grid_M",     "conversion_K", "tolerances", "output_dir", "seed",
                                                "sweep",      "operators",  "asymptotics", "checks"};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw ConfigError("config: unknown field '" + it.key() + "'");
    if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
    if (j.contains("potentials"))
      for (const auto& p : j["potentials"]) c.potentials.push_back(parse_function(p));
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("targets"))
      for (const auto& p : j["targets"]) c.targets.push_back(parse_function(p));
    if (j.contains("n_max")) c.n_max = j["n_max"].get<int>();
    if (j.contains("m_list")) c.m_list = j["m_list"].get<std::vector<int>>();
    if (j.contains("grid_M")) c.grid_M = j["grid_M"].get<int>();
    if (j.contains("conversion_K")) c.conversion_K = j["conversion_K"].get<int>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      auto get = [&](const char* k, double& v) {
        if (t.contains(k)) v = t[k].get<double>();
      };
      get("biorth", c.tol.biorth);
      get("decay_ratio", c.tol.decay_ratio);
      get("sine_poly_ratio", c.tol.sine_poly_ratio);
      get("gamma_growth", c.tol.gamma_growth);
      get("psi2_ratio", c.tol.psi2_ratio);
      get("hardy_ratio", c.tol.hardy_ratio);
      get("operator_bound", c.tol.operator_bound);
      get("refinement", c.tol.refinement);
      get("identity", c.tol.identity);
      get("sweep_chat_ratio", c.tol.sweep_chat_ratio);
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      if (s.contains("radius")) c.sweep.radius = s["radius"].get<double>();
      if (s.contains("count")) c.sweep.count = s["count"].get<int>();
      if (s.contains("cells")) c.sweep.cells = s["cells"].get<int>();
    }
    if (j.contains("operators")) {
      const auto& o = j["operators"];
      if (o.contains("m_list")) c.operators.m_list = o["m_list"].get<std::vector<int>>();
      if (o.contains("x_params")) c.operators.x_params = detail::parse_positions(o["x_params"], "operators.x_params");
      if (o.contains("tilde_m")) c.operators.tilde_m = o["tilde_m"].get<std::vector<int>>();
      if (o.contains("hardy_m")) c.operators.hardy_m = o["hardy_m"].get<std::vector<int>>();
      if (o.contains("identity_m")) c.operators.identity_m = o["identity_m"].get<std::vector<int>>();
    }
    if (j.contains("asymptotics") && j["asymptotics"].contains("n_range")) {
      const auto r = j["asymptotics"]["n_range"].get<std::vector<int>>();
      if (r.size() != 2) throw ConfigError("asymptotics.n_range: expected [lo, hi]");
      c.asym_lo = r[0];
      c.asym_hi = r[1];
    }
    if (j.contains("checks") && j["checks"].contains("norm_bounds"))
      c.norm_bounds = j["checks"]["norm_bounds"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline void validate(ExperimentConfig& c) {
  static const std::vector<std::string> modes{"spectrum", "expand", "equiconv", "asymptotics", "operators", "sweep"};
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) throw ConfigError("unknown mode '" + c.mode + "'");
  if (c.grid_M < 2 || c.grid_M % 2) throw ConfigError("grid_M must be even and >= 2");
  if (c.conversion_K < 1) throw ConfigError("conversion_K must be >= 1");
  for (std::size_t i = 0; i < c.m_list.size(); ++i) {
    if (c.m_list[i] < 1) throw ConfigError("m_list entries must be >= 1");
    if (i && c.m_list[i] <= c.m_list[i - 1]) throw ConfigError("m_list must be strictly increasing");
  }
  if (c.mode == "equiconv" || c.mode == "sweep") {
    if (c.m_list.empty()) throw ConfigError("m_list is empty");
    c.n_max = std::max(c.n_max, c.m_list.back());
  }
  if (c.mode == "asymptotics") {
    if (c.asym_lo < 1 || c.asym_hi < c.asym_lo) throw ConfigError("asymptotics.n_range must satisfy 1 <= lo <= hi");
    c.n_max = std::max(c.n_max, c.asym_hi);
  }
  if (c.n_max < 1) throw ConfigError("n_max must be >= 1");
  if (c.mode != "operators" && c.mode != "sweep" && c.potentials.empty())
    throw ConfigError("mode '" + c.mode + "' needs at least one potential");
  if (c.targets.empty()) c.targets = default_corpus(c.seed);
  if (c.sweep.count < 0 || c.sweep.cells < 1 || c.sweep.radius < 0.0) throw ConfigError("invalid sweep block");
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Checks and reports.

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;

  void check(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }
  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  void merge(RunReport other) {
    for (auto& c : other.checks) checks.push_back(std::move(c));
    for (auto& w : other.warnings) warnings.push_back(std::move(w));
    for (auto& f : other.files) files.push_back(std::move(f));
  }
};

inline int exit_code(const RunReport& r, bool strict) {
  if (!r.all_passed()) return 1;
  if (strict && !r.warnings.empty()) return 1;
  return 0;
}

inline std::string ratio_text(double num, double den) {
  std::ostringstream s;
  s << num << " / " << den;
  return s.str();
}

// Eigen-data of one potential on a grid carrying the breakpoints of u and
// of every target.
struct SpectralData {
  L2Function u;
  std::vector<RootInfo> roots;
  std::vector<Eigenpair> pairs;
  BiorthSystem biorth;
  Grid grid;
};

inline SpectralData spectral_data(const L2Function& u, const std::vector<L2Function>& targets, int n_max, int M, int K,
                                  bool pairing_diagnostics = false) {
  std::vector<std::vector<double>> sets{u.breakpoints()};
  for (const auto& f : targets) sets.push_back(f.breakpoints());
  SpectrumOptions opt;
  opt.conversion_k = K;
  SpectralData d{u, {}, {}, {}, build_grid(std::span<const std::vector<double>>(sets), M)};
  d.roots = locate(u, n_max, opt);
  d.pairs = eigenpairs(u, d.roots, d.grid, K);
  d.biorth = biorthogonal(d.pairs, pairing_diagnostics);
  return d;
}

struct EquiconvCheck {
  std::string target;
  EquiconvReport report;
  bool vacuous = false;       // B_m f vanishes to rounding, nothing to decay
  bool decay = true;          // supnorm(last) <= decay_ratio * supnorm(first)
  bool upsilon = true;
  bool sine_decay = true;     // only for sine polynomials with T = 0 at the last m
  bool sine_applicable = false;

  bool passed() const { return decay && upsilon && sine_decay; }
};

inline EquiconvCheck check_equiconv(const L2Function& f, const EquiconvReport& r, const Tolerances& tol) {
  EquiconvCheck c{f.label(), r};
  const double first = r.supnorm.front(), last = r.supnorm.back();
  c.vacuous = std::all_of(r.supnorm.begin(), r.supnorm.end(), [&](double v) { return v <= tol.vacuous; });
  if (c.vacuous) {
    // Nothing to fit; rounding noise is not a constant.
    c.report.c_hat = 0.0;
    std::fill(c.report.upsilon.begin(), c.report.upsilon.end(), 0.0);
    return c;
  }
  c.decay = last <= tol.decay_ratio * first;
  c.upsilon = r.upsilon_decreasing;
  const int d = sine_degree(f);
  c.sine_applicable = d > 0 && tail_start(r.m.back()) > d;
  if (c.sine_applicable) c.sine_decay = last <= tol.sine_poly_ratio * first;
  return c;
}

inline void write_equiconv_csv(const std::filesystem::path& path, const EquiconvReport& r) {
  CsvWriter w(path, {"m", "supnorm", "tail", "chat_tail", "upsilon_hat"});
  for (std::size_t i = 0; i < r.m.size(); ++i) w.values(r.m[i], r.supnorm[i], r.tail[i], r.c_hat * r.tail[i], r.upsilon[i]);
}

inline std::string safe_name(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  return out.empty() ? "unnamed" : out;
}

// ---------------------------------------------------------------------------
// Modes.

inline RunReport run_spectrum(const ExperimentConfig& c) {
  RunReport rep;
  SpectrumOptions opt;
  opt.conversion_k = c.conversion_K;
  for (const auto& u : c.potentials) {
    const auto roots = locate(u, c.n_max, opt);
    const auto path = c.output_dir / ("spectrum_" + safe_name(u.label()) + ".csv");
    write_spectrum_csv(path, roots);
    rep.files.push_back(path);
    const int N = operational_simple_index(roots);
    if (N > 1) rep.warnings.push_back(u.label() + ": near-degenerate eigenvalues below n = " + std::to_string(N));
    const Grid g = grid_for({&u}, c.grid_M);
    const auto trace = propagate(discretize(u, c.conversion_K), roots.front().lambda, false, &g);
    const auto tpath = c.output_dir / ("trace_" + safe_name(u.label()) + "_n1.csv");
    write_trace_csv(tpath, trace, g);
    rep.files.push_back(tpath);
  }
  return rep;
}

inline RunReport run_expand(const ExperimentConfig& c) {
  RunReport rep;
  for (const auto& u : c.potentials) {
    const auto d = spectral_data(u, c.targets, c.n_max, c.grid_M, c.conversion_K, true);
    rep.check("biorthogonality[" + u.label() + "]", d.biorth.max_pairing_error <= c.tol.biorth,
              "max |(y_j, w_k) - delta_jk| = " + fmt_double(d.biorth.max_pairing_error));
    for (const auto& f : c.targets) {
      const auto e = expand(f, d.biorth, d.grid);
      const auto path = c.output_dir / ("coeffs_" + safe_name(u.label()) + "_" + safe_name(f.label()) + ".csv");
      CsvWriter w(path, {"n", "re_c", "im_c", "re_c0", "im_c0"});
      for (int n = 1; n <= e.n_max; ++n) {
        const cplx cn = e.c[std::size_t(n - 1)], c0 = e.c0[std::size_t(n - 1)];
        w.values(n, cn.real(), cn.imag(), c0.real(), c0.imag());
      }
      rep.files.push_back(path);
    }
  }
  return rep;
}

// Equiconvergence reports for every target under one potential.
inline std::vector<EquiconvCheck> equiconv_checks(const SpectralData& d, const std::vector<L2Function>& targets,
                                                  const std::vector<int>& m_list, const Tolerances& tol) {
  std::vector<EquiconvCheck> out;
  for (const auto& f : targets) out.push_back(check_equiconv(f, equiconv_report(f, d.pairs, d.biorth, m_list, d.grid), tol));
  return out;
}

inline void record_equiconv(RunReport& rep, const std::string& u_label, const std::vector<EquiconvCheck>& checks) {
  for (const auto& c : checks) {
    const std::string key = "[" + u_label + "," + c.target + "]";
    if (c.vacuous) {
      rep.check("equiconv_zero" + key, true, "B_m f vanishes for every m");
      continue;
    }
    rep.check("equiconv_decay" + key, c.decay, ratio_text(c.report.supnorm.back(), c.report.supnorm.front()));
    rep.check("equiconv_upsilon" + key, c.upsilon, "upsilon_hat non-increasing over the last three m");
    if (c.sine_applicable)
      rep.check("equiconv_sine_tail" + key, c.sine_decay,
                ratio_text(c.report.supnorm.back(), c.report.supnorm.front()));
  }
}

inline RunReport run_equiconv(const ExperimentConfig& c) {
  RunReport rep;
  for (const auto& u : c.potentials) {
    const auto d = spectral_data(u, c.targets, c.n_max, c.grid_M, c.conversion_K);
    const auto checks = equiconv_checks(d, c.targets, c.m_list, c.tol);
    for (const auto& ch : checks) {
      const auto path = c.output_dir / ("equiconv_" + safe_name(u.label()) + "_" + safe_name(ch.target) + ".csv");
      write_equiconv_csv(path, ch.report);
      rep.files.push_back(path);
    }
    record_equiconv(rep, u.label(), checks);
  }
  return rep;
}

struct AsymptoticsResult {
  RemainderSequences seq;     // n = 1..hi
  std::vector<SplitFit> fits;  // n = 1..hi
  double gamma_growth = 0.0;   // sum_{n<=hi} gamma_n^2 over sum_{n<=3hi/4} gamma_n^2, minus 1
  double psi2_ratio = 0.0;     // sum_{[hi/2, hi]} psi2 over sum_{[lo, hi/2]} psi2
};

inline AsymptoticsResult asymptotics(const SpectralData& d, int lo, int hi) {
  AsymptoticsResult r;
  r.seq = remainders(d.pairs, d.biorth, d.grid, 1, hi);
  r.fits = fit_and_split(r.seq, d.u, d.grid);
  const int head_end = (3 * hi) / 4;
  double total = 0.0, head = 0.0;
  for (std::size_t i = 0; i < r.seq.size(); ++i) {
    const double g2 = r.seq.gamma[i] * r.seq.gamma[i];
    total += g2;
    if (r.seq.n(i) <= head_end) head += g2;
  }
  r.gamma_growth = head > 0.0 ? (total - head) / head : 0.0;
  const int mid = hi / 2;
  double upper = 0.0, lower = 0.0;
  for (const auto& f : r.fits) {
    if (f.n >= mid) upper += f.psi2_norm;
    if (f.n >= lo && f.n <= mid) lower += f.psi2_norm;
  }
  r.psi2_ratio = lower > 0.0 ? upper / lower : 0.0;
  return r;
}

inline RunReport run_asymptotics(const ExperimentConfig& c) {
  RunReport rep;
  for (const auto& u : c.potentials) {
    // gamma_n needs every n from 1 for the l2 sum.
    const auto d = spectral_data(u, {}, c.n_max, c.grid_M, c.conversion_K);
    const auto a = asymptotics(d, c.asym_lo, c.asym_hi);
    const auto path = c.output_dir / ("asymptotics_" + safe_name(u.label()) + ".csv");
    CsvWriter w(path, {"n", "gamma_n", "alpha", "beta", "psi2_norm"});
    for (std::size_t i = std::size_t(c.asym_lo - 1); i < a.seq.size(); ++i)
      w.values(a.seq.n(i), a.seq.gamma[i], std::abs(a.fits[i].alpha), std::abs(a.fits[i].beta), a.fits[i].psi2_norm);
    rep.files.push_back(path);
    const bool trivial = l2_norm(u) == 0.0;
    if (trivial) {
      double worst = 0.0;
      for (double g : a.seq.gamma) worst = std::max(worst, g);
      for (const auto& f : a.fits) worst = std::max(worst, f.psi2_norm);
      rep.check("remainders_zero[" + u.label() + "]", worst <= 1e-8, "max gamma_n, psi2 = " + fmt_double(worst));
      continue;
    }
    rep.check("gamma_l2[" + u.label() + "]", a.gamma_growth < c.tol.gamma_growth,
              "growth of sum gamma^2 over the last quarter = " + fmt_double(a.gamma_growth));
    rep.check("psi2_l1[" + u.label() + "]", a.psi2_ratio < c.tol.psi2_ratio,
              "upper/lower psi2 sum ratio = " + fmt_double(a.psi2_ratio));
  }
  return rep;
}

struct OperatorRow {
  int m;
  KernelKind kind;
  double x_param;
  RefinedNorm norm;
};

inline int operator_grid(int m) {
  int M = std::max(256, 16 * std::max(m, 1));
  return M + (M % 2);
}

inline RunReport run_operators(const ExperimentConfig& c) {
  RunReport rep;
  const auto& o = c.operators;
  std::vector<OperatorRow> rows;
  for (int m : o.m_list) rows.push_back({m, KernelKind::S, 0.0, refined_norm(KernelKind::S, m, 0.0, operator_grid(m))});
  for (int m : o.tilde_m)
    for (double x : o.x_params)
      rows.push_back({m, KernelKind::A_tilde, x, refined_norm(KernelKind::A_tilde, m, x, operator_grid(m))});
  const HardyReport hardy = hardy_bound_check(o.hardy_m);
  for (const auto& n : hardy.norms) rows.push_back({n.m, KernelKind::E, 0.0, n});
  for (double x : o.x_params) rows.push_back({0, KernelKind::H, x, refined_norm(KernelKind::H, 0, x, 256)});

  const auto path = c.output_dir / "operators.csv";
  CsvWriter w(path, {"m", "kind", "x_param", "norm"});
  for (const auto& r : rows) w.values(r.m, to_string(r.kind), r.x_param, r.norm.norm);
  rep.files.push_back(path);

  for (const auto& r : rows) {
    const std::string key = to_string(r.kind) + "[m=" + std::to_string(r.m) + ",x=" + fmt_double(r.x_param) + "]";
    rep.check("refinement_" + key, r.norm.stable(c.tol.refinement),
              "relative change M->2M = " + fmt_double(r.norm.relative_change()));
    const bool bounded = r.kind == KernelKind::S || r.kind == KernelKind::A_tilde;
    if (bounded && r.norm.norm > c.tol.operator_bound) {
      const std::string msg = "norm " + fmt_double(r.norm.norm) + " exceeds " + fmt_double(c.tol.operator_bound);
      if (c.norm_bounds)
        rep.check("bound_" + key, false, msg);
      else
        rep.warnings.push_back("bound_" + key + ": " + msg);
    } else if (bounded && c.norm_bounds) {
      rep.check("bound_" + key, true, "norm " + fmt_double(r.norm.norm));
    }
    if (r.kind == KernelKind::H) rep.check("H_norm_" + key, r.norm.norm <= 1.0 + 1e-9, fmt_double(r.norm.norm));
  }
  rep.check("hardy_ratio", hardy.ratio <= c.tol.hardy_ratio, "max/min ||E_m|| = " + fmt_double(hardy.ratio));
  for (int m : o.identity_m) {
    const int M = operator_grid(m);
    const double dec = std::max(decomposition_residual(m, M), decomposition_residual(m, 2 * M));
    rep.check("identity_A=S-E*[m=" + std::to_string(m) + "]", dec <= c.tol.identity, fmt_double(dec));
    for (double x : o.x_params) {
      const int k = int(std::lround(x / pi * M));
      const double sh = std::max(shift_identity_residual(m, M, k), shift_identity_residual(m, 2 * M, 2 * k));
      rep.check("identity_shift[m=" + std::to_string(m) + ",x=" + fmt_double(x) + "]", sh <= c.tol.identity,
                fmt_double(sh));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Uniform-ball sweep.

struct SweepItem {
  int index = 0;
  L2Function u = make_constant(0.0);
  double u_norm = 0.0;
  double c_hat = 0.0;  // fitted on the first target (chi_[0, pi/2] in the default corpus)
  std::vector<EquiconvCheck> checks;
  std::string error;

  bool passed() const {
    return error.empty() && std::all_of(checks.begin(), checks.end(), [](const EquiconvCheck& c) { return c.passed(); });
  }
};

struct SweepReport {
  std::vector<SweepItem> items;
  double max_c_hat = 0.0;
  double median_c_hat = 0.0;
  bool uniform = true;  // max <= ratio * median
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Potentials are drawn sequentially from one generator, so the sample set
// depends only on (seed, count, cells, R); items are analysed in a pool.
inline SweepReport ball_sweep(double R, int count, std::uint64_t seed, const ExperimentConfig& tmpl,
                              const std::filesystem::path* item_dir = nullptr) {
  std::mt19937_64 g(seed);
  SweepReport rep;
  for (int i = 0; i < count; ++i) {
    SweepItem item;
    item.index = i;
    item.u = random_ball_potential(R, tmpl.sweep.cells, g, "ball_" + std::to_string(i));
    item.u_norm = l2_norm(item.u);
    rep.items.push_back(std::move(item));
  }
  const int n_max = std::max(tmpl.n_max, tmpl.m_list.back());
  auto work = [&](SweepItem& item) {
    try {
      const auto d = spectral_data(item.u, tmpl.targets, n_max, tmpl.grid_M, tmpl.conversion_K);
      item.checks = equiconv_checks(d, tmpl.targets, tmpl.m_list, tmpl.tol);
      item.c_hat = item.checks.front().report.c_hat;
      if (item_dir)
        for (const auto& ch : item.checks)
          write_equiconv_csv(*item_dir / ("ball_" + std::to_string(item.index) + "_" + safe_name(ch.target) + ".csv"),
                             ch.report);
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  };
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t next = 0;
  while (next < rep.items.size()) {
    std::vector<std::future<void>> batch;
    for (std::size_t k = 0; k < workers && next < rep.items.size(); ++k, ++next)
      batch.push_back(std::async(std::launch::async, work, std::ref(rep.items[next])));
    for (auto& f : batch) f.get();
  }
  std::vector<double> chats;
  for (const auto& it : rep.items)
    if (it.error.empty()) chats.push_back(it.c_hat);
  rep.median_c_hat = median(chats);
  rep.max_c_hat = chats.empty() ? 0.0 : *std::max_element(chats.begin(), chats.end());
  rep.uniform = rep.max_c_hat <= tmpl.tol.sweep_chat_ratio * rep.median_c_hat;
  return rep;
}

inline RunReport run_sweep(const ExperimentConfig& c) {
  RunReport rep;
  const auto dir = c.output_dir / "sweep";
  std::filesystem::create_directories(dir);
  const auto s = ball_sweep(c.sweep.radius, c.sweep.count, c.seed, c, &dir);
  const auto path = c.output_dir / "sweep_summary.csv";
  CsvWriter w(path, {"index", "u_norm", "c_hat", "passed", "error"});
  for (const auto& it : s.items) {
    w.values(it.index, it.u_norm, it.c_hat, it.passed(), safe_name(it.error.empty() ? "-" : it.error));
    if (!it.error.empty()) rep.check("sweep_item[" + std::to_string(it.index) + "]", false, it.error);
    else record_equiconv(rep, it.u.label(), it.checks);
  }
  rep.files.push_back(path);
  rep.check("sweep_uniformity", s.uniform,
            "max C_hat " + fmt_double(s.max_c_hat) + ", median " + fmt_double(s.median_c_hat));
  return rep;
}

inline RunReport run(ExperimentConfig c) {
  validate(c);
  std::filesystem::create_directories(c.output_dir);
  if (c.mode == "spectrum") return run_spectrum(c);
  if (c.mode == "expand") return run_expand(c);
  if (c.mode == "equiconv") return run_equiconv(c);
  if (c.mode == "asymptotics") return run_asymptotics(c);
  if (c.mode == "operators") return run_operators(c);
  return run_sweep(c);
}

}  // namespace equiconv
