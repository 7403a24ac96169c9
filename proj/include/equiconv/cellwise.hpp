#pragma once

// Closed-form integrals over the sub-intervals of a grid on which the
// potential is constant.  There the shooting solution is
//
//   y(x_i + tau) = A_i e^{ik tau} + B_i e^{-ik tau},   k = sqrt(lambda),
//
// with A_i + B_i = y_i and ik (A_i - B_i) = c_i y_i + z_i.  Targets are
// written locally as sums of (p + q tau) e^{gamma tau}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "grid.hpp"
#include "potential.hpp"

namespace equiconv::cellwise {

// (e^z - 1) / z
inline cplx phi1(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx sum = 0.0, term = 1.0;
    for (int k = 0; k < 20; ++k) {
      sum += term / double(k + 1);
      term *= z / double(k + 1);
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

// int_0^1 t e^{zt} dt
inline cplx phi2(cplx z) {
  if (std::abs(z) < 0.5) {
    cplx sum = 0.0, term = 1.0;
    for (int k = 0; k < 20; ++k) {
      sum += term / double(k + 2);
      term *= z / double(k + 1);
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// True when every point lies on a grid node (within 1e-12).
inline bool on_nodes(const std::vector<double>& points, const Grid& grid) {
  const auto& x = grid.nodes();
  for (double b : points) {
    auto it = std::lower_bound(x.begin(), x.end(), b - 1e-12);
    if (it == x.end() || std::abs(*it - b) > 1e-12) return false;
  }
  return true;
}

// Below this |k| the two exponentials cancel; callers fall back to Simpson.
inline constexpr double min_wavenumber = 1e-3;

struct Amplitudes {
  cplx k;
  std::vector<cplx> A, B;  // per sub-interval
};

inline std::optional<Amplitudes> amplitudes(std::span<const cplx> y, std::span<const cplx> quasi, cplx lambda,
                                            const L2Function& pc, const Grid& grid) {
  if (!pc.is_piecewise_constant() || !on_nodes(pc.breakpoints(), grid)) return std::nullopt;
  const cplx k = std::sqrt(lambda);
  if (std::abs(k) < min_wavenumber) return std::nullopt;
  const auto& x = grid.nodes();
  Amplitudes a{k, std::vector<cplx>(x.size() - 1), std::vector<cplx>(x.size() - 1)};
  const cplx ik = cplx(0.0, 1.0) * k;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const cplx c = eval_right(pc, x[i]);
    const cplx g = (c * y[i] + quasi[i]) / ik;
    a.A[i] = 0.5 * (y[i] + g);
    a.B[i] = 0.5 * (y[i] - g);
  }
  return a;
}

// int_0^pi y^2 and int_0^pi |y|^2.
struct Moments {
  cplx square;
  double modulus;
};

inline Moments moments(const Amplitudes& a, const Grid& grid) {
  const auto& x = grid.nodes();
  const cplx ik = cplx(0.0, 1.0) * a.k;
  const cplx ikb = std::conj(ik);
  cplx sq = 0.0, mod = 0.0;
  double h_prev = -1.0;
  cplx p_pp = 0.0, p_mm = 0.0, c_pp = 0.0, c_pm = 0.0, c_mp = 0.0, c_mm = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    if (std::abs(h - h_prev) > 1e-11 * h) {
      p_pp = h * phi1(2.0 * ik * h);
      p_mm = h * phi1(-2.0 * ik * h);
      c_pp = h * phi1((ik + ikb) * h);
      c_pm = h * phi1((ik - ikb) * h);
      c_mp = h * phi1((-ik + ikb) * h);
      c_mm = h * phi1((-ik - ikb) * h);
      h_prev = h;
    }
    const cplx A = a.A[i], B = a.B[i];
    sq += A * A * p_pp + 2.0 * A * B * h + B * B * p_mm;
    // conj(y) = conj(A) e^{conj(ik) tau} + conj(B) e^{-conj(ik) tau}
    const cplx Ab = std::conj(A), Bb = std::conj(B);
    mod += A * Ab * c_pp + A * Bb * c_pm + B * Ab * c_mp + B * Bb * c_mm;
  }
  return {sq, mod.real()};
}

// Local representation of a target on every sub-interval:
// f(x_i + tau) = sum_g (p[i][g] + q[i][g] tau) e^{gamma[g] tau}.
struct LocalTerms {
  std::vector<cplx> gamma;
  std::vector<cplx> p, q;  // row-major, intervals x gamma.size()
};

inline std::optional<LocalTerms> local_terms(const L2Function& f, const Grid& grid) {
  if (!on_nodes(f.breakpoints(), grid)) return std::nullopt;
  const auto& x = grid.nodes();
  const std::size_t I = x.size() - 1;
  LocalTerms t;
  if (f.is_piecewise_constant()) {
    t.gamma = {0.0};
    t.p.resize(I);
    t.q.assign(I, 0.0);
    for (std::size_t i = 0; i < I; ++i) t.p[i] = eval_right(f, x[i]);
    return t;
  }
  if (std::holds_alternative<PiecewiseLinear>(f.kind())) {
    t.gamma = {0.0};
    t.p.resize(I);
    t.q.resize(I);
    for (std::size_t i = 0; i < I; ++i) {
      const cplx a = eval_u(f, x[i]), b = eval_u(f, x[i + 1]);
      t.p[i] = a;
      t.q[i] = (b - a) / (x[i + 1] - x[i]);
    }
    return t;
  }
  const auto& ff = std::get<FiniteFourier>(f.kind());
  const int J = int(std::max(ff.sine.size(), ff.cosine.empty() ? 0 : ff.cosine.size() - 1));
  const std::size_t G = std::size_t(2 * J + 1);  // gamma = i m, m = -J..J
  for (int m = -J; m <= J; ++m) t.gamma.push_back(cplx(0.0, double(m)));
  t.p.assign(I * G, 0.0);
  t.q.assign(I * G, 0.0);
  const cplx I2 = cplx(0.0, 2.0);
  for (std::size_t i = 0; i < I; ++i) {
    cplx* row = &t.p[i * G];
    for (int j = 1; j <= int(ff.sine.size()); ++j) {
      const cplx e = std::exp(cplx(0.0, j * x[i]));
      const cplx a = ff.sine[std::size_t(j - 1)];
      row[J + j] += a * e / I2;
      row[J - j] -= a / (e * I2);
    }
    for (int j = 0; j < int(ff.cosine.size()); ++j) {
      const cplx a = ff.cosine[std::size_t(j)];
      if (j == 0) {
        row[J] += a;
        continue;
      }
      const cplx e = std::exp(cplx(0.0, j * x[i]));
      row[J + j] += 0.5 * a * e;
      row[J - j] += 0.5 * a / e;
    }
  }
  return t;
}

// int_0^pi f y
inline cplx integrate_product(const LocalTerms& t, const Amplitudes& a, const Grid& grid) {
  const auto& x = grid.nodes();
  const std::size_t G = t.gamma.size();
  const cplx ik = cplx(0.0, 1.0) * a.k;
  std::vector<cplx> f1p(G), f2p(G), f1m(G), f2m(G);
  double h_prev = -1.0;
  cplx total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = x[i + 1] - x[i];
    if (std::abs(h - h_prev) > 1e-11 * h) {
      for (std::size_t g = 0; g < G; ++g) {
        const cplx zp = (t.gamma[g] + ik) * h, zm = (t.gamma[g] - ik) * h;
        f1p[g] = h * phi1(zp);
        f2p[g] = h * h * phi2(zp);
        f1m[g] = h * phi1(zm);
        f2m[g] = h * h * phi2(zm);
      }
      h_prev = h;
    }
    const cplx* p = &t.p[i * G];
    const cplx* q = &t.q[i * G];
    cplx plus = 0.0, minus = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      plus += p[g] * f1p[g] + q[g] * f2p[g];
      minus += p[g] * f1m[g] + q[g] * f2m[g];
    }
    total += a.A[i] * plus + a.B[i] * minus;
  }
  return total;
}

}  // namespace equiconv::cellwise
