#pragma once

// Exact propagation of the quasi-derivative system
//
//   w' = u w + z,   z' = -(lambda + u^2) w - u z,      z = w' - u w,
//
// across cells on which u is constant.  On such a cell the coefficient matrix
// A = [[c, 1], [-(lambda + c^2), -c]] squares to -lambda I, so
// exp(A h) = cos(sqrt(lambda) h) I + sin(sqrt(lambda) h)/sqrt(lambda) A.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "potential.hpp"

namespace equiconv {

struct Mat2 {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static Mat2 identity() { return {}; }
  static Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

  cplx det() const { return a * d - b * c; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend Mat2 operator+(const Mat2& x, const Mat2& y) { return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d}; }
  friend Mat2 operator-(const Mat2& x, const Mat2& y) { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }
  friend Mat2 operator*(cplx s, const Mat2& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
};

struct Vec2 {
  cplx first{0.0}, second{0.0};
};

inline Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.a * v.first + m.b * v.second, m.c * v.first + m.d * v.second};
}
inline Vec2 operator+(const Vec2& x, const Vec2& y) { return {x.first + y.first, x.second + y.second}; }

struct TransferMatrix {
  Mat2 entries;
  std::optional<Mat2> dlambda;
};

// cos(sqrt(lambda) h) and s = sin(sqrt(lambda) h)/sqrt(lambda) as entire
// functions of lambda, with their lambda-derivatives.
struct EntireTrig {
  cplx cos, sinc, dcos, dsinc;
};

// Below this |lambda| h^2 the power series replaces the closed forms.
inline constexpr double taylor_threshold = 1e-4;

inline EntireTrig entire_trig(cplx lambda, double h, bool want_derivative) {
  const cplx z = lambda * h * h;
  EntireTrig r;
  if (std::abs(z) < taylor_threshold) {
    // Degree-8 series in sqrt(lambda) h.
    cplx term_c = 1.0, term_s = 1.0, sum_c = 0.0, sum_s = 0.0;
    for (int k = 0; k <= 4; ++k) {
      sum_c += term_c;
      sum_s += term_s;
      term_c *= -z / double((2 * k + 1) * (2 * k + 2));
      term_s *= -z / double((2 * k + 2) * (2 * k + 3));
    }
    r.cos = sum_c;
    r.sinc = h * sum_s;
  } else {
    const cplx root = std::sqrt(lambda);
    r.cos = std::cos(root * h);
    r.sinc = std::sin(root * h) / root;
  }
  if (want_derivative) {
    r.dcos = -0.5 * h * r.sinc;
    if (std::abs(z) < 1.0) {
      // ds/dlambda = h^3 sum_{k>=1} k (-z)^{k-1} (-1) / (2k+1)!; the closed
      // form (h cos - s) / (2 lambda) cancels badly for small z.
      cplx sum = 0.0, zpow = 1.0;
      double fact = 6.0;  // (2k+1)! at k = 1
      for (int k = 1; k <= 12; ++k) {
        sum += double(k) * (k % 2 == 1 ? -1.0 : 1.0) * zpow / fact;
        zpow *= z;
        fact *= double((2 * k + 2) * (2 * k + 3));
      }
      r.dsinc = h * h * h * sum;
    } else {
      r.dsinc = (h * r.cos - r.sinc) / (2.0 * lambda);
    }
  }
  return r;
}

inline TransferMatrix interval_propagator(cplx c, double h, cplx lambda, bool want_dlambda) {
  if (!(h > 0.0)) throw DomainError("interval_propagator: h must be positive");
  const EntireTrig e = entire_trig(lambda, h, want_dlambda);
  const Mat2 A{c, 1.0, -(lambda + c * c), -c};
  TransferMatrix t;
  t.entries = e.cos * Mat2::identity() + e.sinc * A;
  if (want_dlambda) {
    const Mat2 dA{0.0, 0.0, -1.0, 0.0};
    t.dlambda = e.dcos * Mat2::identity() + e.dsinc * A + e.sinc * dA;
  }
  return t;
}

struct ShootingResult {
  cplx lambda;
  cplx omega_end;
  cplx quasi_end;
  std::optional<cplx> omega_dlambda_end;
  std::optional<cplx> quasi_dlambda_end;
  // Samples of omega and its quasi-derivative at the trace grid nodes.
  std::vector<cplx> trace_omega;
  std::vector<cplx> trace_quasi;
};

namespace detail {

// Advances (state, dstate) across one constant piece.
inline void advance(Vec2& v, Vec2& dv, cplx c, double h, cplx lambda, bool want_d) {
  const TransferMatrix t = interval_propagator(c, h, lambda, want_d);
  if (want_d) dv = t.entries * dv + (*t.dlambda) * v;
  v = t.entries * v;
}

}  // namespace detail

// Product of cell propagators over cells [first, last) of a step function.
inline TransferMatrix cell_transfer(const PiecewiseConstant& pc, cplx lambda, std::size_t first,
                                    std::size_t last, bool want_dlambda) {
  TransferMatrix acc{Mat2::identity(), want_dlambda ? std::optional<Mat2>(Mat2::zero()) : std::nullopt};
  for (std::size_t i = first; i < last; ++i) {
    const double h = pc.breakpoints[i + 1] - pc.breakpoints[i];
    const TransferMatrix t = interval_propagator(pc.values[i], h, lambda, want_dlambda);
    if (want_dlambda) acc.dlambda = t.entries * (*acc.dlambda) + (*t.dlambda) * acc.entries;
    acc.entries = t.entries * acc.entries;
  }
  return acc;
}

// Left-to-right shooting from (omega, omega^[1]) = (0, 1) at x = 0.
inline ShootingResult propagate(const L2Function& p, cplx lambda, bool want_dlambda,
                                const Grid* trace_grid = nullptr) {
  if (!p.is_piecewise_constant()) throw DomainError("propagate: potential must be piecewise constant");
  const auto& pc = p.piecewise_constant();
  Vec2 v{0.0, 1.0}, dv{0.0, 0.0};
  ShootingResult r{lambda, 0.0, 0.0, std::nullopt, std::nullopt, {}, {}};

  if (trace_grid == nullptr) {
    for (std::size_t i = 0; i < pc.values.size(); ++i)
      detail::advance(v, dv, pc.values[i], pc.breakpoints[i + 1] - pc.breakpoints[i], lambda, want_dlambda);
  } else {
    // Walk the merged sequence of grid nodes and cell breakpoints.
    const auto& x = trace_grid->nodes();
    r.trace_omega.reserve(x.size());
    r.trace_quasi.reserve(x.size());
    r.trace_omega.push_back(v.first);
    r.trace_quasi.push_back(v.second);
    std::size_t cell = 0;
    double pos = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
      const double target = x[i];
      while (cell + 1 < pc.values.size() && pc.breakpoints[cell + 1] < target) {
        const double h = pc.breakpoints[cell + 1] - pos;
        if (h > 0.0) detail::advance(v, dv, pc.values[cell], h, lambda, want_dlambda);
        pos = pc.breakpoints[cell + 1];
        ++cell;
      }
      const double h = target - pos;
      if (h > 0.0) detail::advance(v, dv, pc.values[cell], h, lambda, want_dlambda);
      pos = target;
      r.trace_omega.push_back(v.first);
      r.trace_quasi.push_back(v.second);
    }
  }
  r.omega_end = v.first;
  r.quasi_end = v.second;
  if (want_dlambda) {
    r.omega_dlambda_end = dv.first;
    r.quasi_dlambda_end = dv.second;
  }
  return r;
}

// Default number of cells used to project a non-step primitive.
inline constexpr int default_conversion_k = 1024;

// Phi(lambda) = omega(pi, lambda) with the discretisation cached.
class CharacteristicFunction {
 public:
  explicit CharacteristicFunction(const L2Function& p, int conversion_k = default_conversion_k)
      : pc_(discretize(p, conversion_k)) {}

  const L2Function& discretized() const { return pc_; }

  cplx operator()(cplx lambda) const { return propagate(pc_, lambda, false).omega_end; }

  cplx derivative(cplx lambda) const { return *propagate(pc_, lambda, true).omega_dlambda_end; }

  // (Phi, Phi') in one sweep.
  std::pair<cplx, cplx> value_and_derivative(cplx lambda) const {
    const auto r = propagate(pc_, lambda, true);
    return {r.omega_end, *r.omega_dlambda_end};
  }

  // Number of zeros of omega(., lambda) in (0, pi] for real u and real lambda,
  // i.e. the number of eigenvalues strictly below lambda (Sturm oscillation).
  int oscillation_count(double lambda) const {
    const auto& pc = pc_.piecewise_constant();
    double w = 0.0, z = 1.0;
    int count = 0;
    for (std::size_t i = 0; i < pc.values.size(); ++i) {
      const double c = pc.values[i].real();
      const double h = pc.breakpoints[i + 1] - pc.breakpoints[i];
      const TransferMatrix t = interval_propagator(c, h, lambda, false);
      const double w1 = (t.entries.a * w + t.entries.b * z).real();
      const double z1 = (t.entries.c * w + t.entries.d * z).real();
      if (lambda > 0.0) {
        // w(tau) = R sin(k tau + phase) on the cell, with w'(0+) = c w + z.
        const double k = std::sqrt(lambda);
        const double slope = c * w + z;
        const double phase = std::atan2(w, slope / k);
        count += int(std::floor((phase + k * h) / pi) - std::floor(phase / pi));
      } else if ((w * w1 < 0.0) || (w1 == 0.0 && w != 0.0)) {
        // At most one zero per cell when lambda <= 0.
        ++count;
      }
      w = w1;
      z = z1;
    }
    return count;
  }

 private:
  L2Function pc_;
};

inline cplx char_fn(const L2Function& p, cplx lambda, int conversion_k = default_conversion_k) {
  return CharacteristicFunction(p, conversion_k)(lambda);
}

inline cplx char_fn_dlambda(const L2Function& p, cplx lambda, int conversion_k = default_conversion_k) {
  return CharacteristicFunction(p, conversion_k).derivative(lambda);
}

}  // namespace equiconv
