#pragma once

// Eigenvalues as zeros of Phi(lambda) = omega(pi, lambda), normalised
// eigenfunctions, and the biorthogonal system.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cellwise.hpp"
#include "grid.hpp"
#include "shooting.hpp"

namespace equiconv {

struct SpectrumOptions {
  int conversion_k = default_conversion_k;
  // |Phi'(lambda_n)| below this multiple of the free-operator scale aborts.
  double degeneracy_threshold = 1e-8;
  // Argument-principle contour: height max(min_height, 2 ||u||^2),
  // trapezoid density per unit perimeter, integer rounding tolerance.
  double min_contour_height = 8.0;
  double contour_points_per_unit = 64.0;
  double rounding_tolerance = 0.25;
};

struct RootInfo {
  int n = 0;
  cplx lambda;
  double phi_abs = 0.0;   // |Phi(lambda_n)|
  double dphi_abs = 0.0;  // |Phi'(lambda_n)|
  bool simple = true;
};

// |d/dlambda sin(sqrt(lambda) pi)/sqrt(lambda)| at lambda = n^2 is pi/(2 n^2).
inline double derivative_scale(cplx lambda) { return pi / (2.0 * std::max(1.0, std::abs(lambda))); }

namespace detail {

inline void check_simple(const RootInfo& r, const SpectrumOptions& opt) {
  if (r.dphi_abs <= opt.degeneracy_threshold * derivative_scale(r.lambda))
    throw DegeneracyError("near-multiple eigenvalue at lambda = (" + std::to_string(r.lambda.real()) + ", " +
                          std::to_string(r.lambda.imag()) + "), |Phi'| = " + std::to_string(r.dphi_abs) +
                          "; associated-function chains are not supported");
}

// Bisection on the sign of Phi down to a relative width of 1e-6, then
// Newton safeguarded to the bracket.
inline double refine_real_root(const CharacteristicFunction& phi, double lo, double hi) {
  double flo = phi(lo).real();
  double fhi = phi(hi).real();
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw LocalizationError("bracket without sign change");
  while (hi - lo > 1e-6 * (1.0 + std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    const double fm = phi(mid).real();
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    const auto [f, df] = phi.value_and_derivative(x);
    if (f.real() == 0.0) break;
    if ((f.real() < 0.0) == (flo < 0.0))
      lo = x;
    else
      hi = x;
    double next = x - f.real() / df.real();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

// Real spectrum of a real potential, in increasing order.  Windows
// [(n-1/2)^2, (n+1/2)^2] are widened (up to 8 doublings) until the Sturm
// oscillation count places exactly one new eigenvalue inside, then split by
// counting until the bracket isolates lambda_n.
inline std::vector<RootInfo> locate_real(const L2Function& p, int n_max, const SpectrumOptions& opt = {}) {
  if (!p.is_real()) throw DomainError("locate_real: potential must be real valued");
  const CharacteristicFunction phi(p, opt.conversion_k);
  std::vector<RootInfo> out;
  double previous = -1e300;
  for (int n = 1; n <= n_max; ++n) {
    double lo = n == 1 ? 0.25 : (n - 0.5) * (n - 0.5);
    double hi = (n + 0.5) * (n + 0.5);
    lo = std::max(lo, previous);
    int widen = 0;
    while (!(phi.oscillation_count(lo) <= n - 1 && phi.oscillation_count(hi) >= n)) {
      if (++widen > 8)
        throw LocalizationError("no eigenvalue " + std::to_string(n) + " after widening the window 8 times");
      const double w = hi - lo;
      if (phi.oscillation_count(lo) > n - 1) lo -= w;
      if (phi.oscillation_count(hi) < n) hi += w;
    }
    for (int it = 0; it < 200; ++it) {
      if (phi.oscillation_count(lo) == n - 1 && phi.oscillation_count(hi) == n) break;
      const double mid = 0.5 * (lo + hi);
      if (phi.oscillation_count(mid) >= n)
        hi = mid;
      else
        lo = mid;
    }
    const double lambda = detail::refine_real_root(phi, lo, hi);
    const auto [f, df] = phi.value_and_derivative(lambda);
    RootInfo r{n, lambda, std::abs(f), std::abs(df), true};
    detail::check_simple(r, opt);
    out.push_back(r);
    previous = lambda;
  }
  return out;
}

// Winding number of Phi around the rectangle [re_lo, re_hi] x [im_lo, im_hi]:
// trapezoid rule for (1 / 2 pi i) \oint Phi'/Phi.  Phi oscillates with
// period ~4 sqrt|lambda| along the real direction, so the local step is
// max(1, sqrt|lambda|) / points_per_unit.
inline double argument_principle_count(const CharacteristicFunction& phi, double re_lo, double re_hi, double im_lo,
                                       double im_hi, double points_per_unit) {
  const cplx corners[5] = {{re_lo, im_lo}, {re_hi, im_lo}, {re_hi, im_hi}, {re_lo, im_hi}, {re_lo, im_lo}};
  auto log_derivative = [&](cplx z) {
    const auto [f, df] = phi.value_and_derivative(z);
    return df / f;
  };
  cplx total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx a = corners[e], b = corners[e + 1];
    const double len = std::abs(b - a);
    const cplx dir = (b - a) / len;
    const double min_step = len / 16.0;
    double s = 0.0;
    cplx g0 = log_derivative(a);
    while (s < len) {
      const cplx z = a + s * dir;
      const double h = std::min({len - s, min_step, std::max(1.0, std::sqrt(std::abs(z))) / points_per_unit});
      const double s1 = (len - s - h < 1e-9 * len) ? len : s + h;
      const cplx g1 = log_derivative(a + s1 * dir);
      total += 0.5 * (g0 + g1) * ((s1 - s) * dir);
      g0 = g1;
      s = s1;
    }
  }
  return (total / cplx(0.0, 2.0 * pi)).real();
}

inline bool modulus_order(cplx a, cplx b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma < mb;
  return std::arg(a) < std::arg(b);
}

// Complex spectrum ordered by modulus, then argument in (-pi, pi].
inline std::vector<RootInfo> locate_complex(const L2Function& p, int n_max, const SpectrumOptions& opt = {}) {
  const CharacteristicFunction phi(p, opt.conversion_k);
  const double unorm = l2_norm(p);
  const double height = std::max(opt.min_contour_height, 2.0 * unorm * unorm);
  // Re lambda >= -(27/16) ||u||^4 from the quadratic form; keep a margin.
  const double re_lo = -(2.0 + 2.0 * std::pow(unorm, 4));
  const double re_hi = (n_max + 0.5) * (n_max + 0.5);

  auto inside = [&](cplx z) {
    return z.real() > re_lo && z.real() < re_hi && std::abs(z.imag()) < height;
  };
  std::vector<cplx> roots;
  auto newton = [&](cplx z, double max_step) -> std::optional<cplx> {
    for (int it = 0; it < 80; ++it) {
      const auto [f, df] = phi.value_and_derivative(z);
      if (df == cplx(0.0)) return std::nullopt;
      cplx step = f / df;
      if (std::abs(step) > max_step) step *= max_step / std::abs(step);
      z -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) return z;
    }
    return std::nullopt;
  };
  auto add_root = [&](cplx z) {
    if (!inside(z)) return false;
    for (const cplx& r : roots)
      if (std::abs(r - z) <= 1e-6 * (1.0 + std::abs(z))) return false;
    roots.push_back(z);
    return true;
  };

  for (int n = 1; n <= n_max + 1; ++n) {
    const double n2 = double(n) * n;
    const double delta = 0.25;
    const cplx seeds[] = {n2, n2 + cplx(0, 1), n2 - cplx(0, 1), n2 + 2.0 * n * delta, n2 - 2.0 * n * delta};
    for (const cplx& s : seeds) {
      auto z = newton(s, std::max(1.0, 0.5 * n));
      if (z && add_root(*z)) break;
    }
  }

  const double count_raw = argument_principle_count(phi, re_lo, re_hi, -height, height, opt.contour_points_per_unit);
  const long count = std::lround(count_raw);
  if (std::abs(count_raw - double(count)) > opt.rounding_tolerance)
    throw LocalizationError("argument-principle count not near an integer: " + std::to_string(count_raw));
  if (long(roots.size()) < count) {
    // Scan a lattice of seeds over the low part of the rectangle.
    for (double re = re_lo; re < std::min(re_hi, 16.0) && long(roots.size()) < count; re += 1.0)
      for (double im = -height; im <= height && long(roots.size()) < count; im += 1.0)
        if (auto z = newton({re, im}, 1.0)) add_root(*z);
  }
  if (long(roots.size()) != count)
    throw LocalizationError("missing roots in rectangle [" + std::to_string(re_lo) + ", " + std::to_string(re_hi) +
                            "] x [" + std::to_string(-height) + ", " + std::to_string(height) +
                            "]: contour count " + std::to_string(count) + ", found " +
                            std::to_string(roots.size()));
  if (long(roots.size()) < n_max) throw LocalizationError("fewer than n_max eigenvalues in the search rectangle");

  std::sort(roots.begin(), roots.end(), modulus_order);
  std::vector<RootInfo> out;
  for (int n = 1; n <= n_max; ++n) {
    const cplx z = roots[std::size_t(n - 1)];
    const auto [f, df] = phi.value_and_derivative(z);
    RootInfo r{n, z, std::abs(f), std::abs(df), true};
    detail::check_simple(r, opt);
    out.push_back(r);
  }
  return out;
}

// Locator by potential type.
inline std::vector<RootInfo> locate(const L2Function& p, int n_max, const SpectrumOptions& opt = {}) {
  return p.is_real() ? locate_real(p, n_max, opt) : locate_complex(p, n_max, opt);
}

// Smallest n after which no located eigenvalue is flagged near-degenerate
// (|Phi'| within 1e-3 of the degeneracy threshold scale).
inline int operational_simple_index(const std::vector<RootInfo>& roots) {
  int last_bad = 0;
  for (const auto& r : roots)
    if (r.dphi_abs <= 1e-3 * derivative_scale(r.lambda)) last_bad = r.n;
  return last_bad + 1;
}

// ---------------------------------------------------------------------------

struct Eigenpair {
  int n = 0;
  cplx lambda;
  std::vector<cplx> y;      // y_n on the grid, ||y_n|| = 1
  std::vector<cplx> quasi;  // y_n^[1] = y_n' - u y_n
  cplx kappa;               // (y_n, conj y_n) = int y_n^2
  bool simple = true;
  Grid grid;
  std::shared_ptr<const L2Function> potential;  // the step function that was shot
};

inline Eigenpair eigenfunction(const L2Function& p, int n, cplx lambda, const Grid& grid,
                               int conversion_k = default_conversion_k) {
  auto pc = std::make_shared<const L2Function>(discretize(p, conversion_k));
  ShootingResult r = propagate(*pc, lambda, false, &grid);
  // Exact L2 moments when the grid resolves every cell; Simpson otherwise.
  const auto amp = cellwise::amplitudes(r.trace_omega, r.trace_quasi, lambda, *pc, grid);
  std::optional<cellwise::Moments> mom;
  if (amp) mom = cellwise::moments(*amp, grid);
  const double norm = mom ? std::sqrt(mom->modulus) : grid.norm(r.trace_omega);
  if (norm < 1e-14) throw DegeneracyError("degenerate eigenfunction trace at n = " + std::to_string(n));
  Eigenpair e;
  e.n = n;
  e.lambda = lambda;
  e.y = std::move(r.trace_omega);
  e.quasi = std::move(r.trace_quasi);
  for (auto& v : e.y) v /= norm;
  for (auto& v : e.quasi) v /= norm;
  if (mom) {
    e.kappa = mom->square / (norm * norm);
  } else {
    cplx kappa = 0.0;
    const auto& w = grid.weights();
    for (std::size_t i = 0; i < e.y.size(); ++i) kappa += w[i] * e.y[i] * e.y[i];
    e.kappa = kappa;
  }
  e.grid = grid;
  e.potential = std::move(pc);
  return e;
}

inline std::vector<Eigenpair> eigenpairs(const L2Function& p, const std::vector<RootInfo>& roots, const Grid& grid,
                                         int conversion_k = default_conversion_k) {
  std::vector<Eigenpair> out;
  out.reserve(roots.size());
  const L2Function pc = discretize(p, conversion_k);
  for (const auto& r : roots) {
    out.push_back(eigenfunction(pc, r.n, r.lambda, grid, conversion_k));
    out.back().simple = r.simple;
  }
  return out;
}

struct BiorthSystem {
  std::vector<std::vector<cplx>> w;
  std::vector<cplx> kappa;
  Grid grid;
  // Shooting data kept for closed-form inner products.
  std::vector<cplx> lambda;
  std::vector<std::vector<cplx>> quasi;
  std::shared_ptr<const L2Function> potential;
  // max_{j,k} |(y_j, w_k) - delta_jk| over the computed pairs.
  double max_pairing_error = 0.0;
};

// w_n = conj(y_n) / conj(kappa_n), so that (y_n, w_n) = 1 under the
// sesquilinear product (f, g) = int f conj(g).
inline BiorthSystem biorthogonal(const std::vector<Eigenpair>& pairs, bool pairing_diagnostics = true) {
  BiorthSystem b;
  if (pairs.empty()) return b;
  b.grid = pairs.front().grid;
  b.potential = pairs.front().potential;
  for (const auto& e : pairs) {
    if (!e.simple) throw DegeneracyError("biorthogonal: eigenvalue " + std::to_string(e.n) + " is not simple");
    if (!e.grid.same_as(b.grid)) throw GridMismatchError("biorthogonal: eigenpairs live on different grids");
    if (std::abs(e.kappa) < 1e-6)
      throw DegeneracyError("ill-conditioned biorthogonal system: |kappa_" + std::to_string(e.n) +
                            "| = " + std::to_string(std::abs(e.kappa)));
    std::vector<cplx> w(e.y.size());
    const cplx denom = std::conj(e.kappa);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::conj(e.y[i]) / denom;
    b.w.push_back(std::move(w));
    b.kappa.push_back(e.kappa);
    b.lambda.push_back(e.lambda);
    b.quasi.push_back(e.quasi);
  }
  if (pairing_diagnostics) {
    double worst = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j)
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const cplx g = b.grid.inner(pairs[j].y, b.w[k]);
        worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
      }
    b.max_pairing_error = worst;
  }
  return b;
}

}  // namespace equiconv
