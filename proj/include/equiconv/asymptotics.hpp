#pragma once

// Remainders of the eigenfunction asymptotics and the two-term model of the
// biorthogonal remainder psi_n = psi_{n,0} + psi_{n,1} + psi_{n,2}.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "grid.hpp"
#include "spectrum.hpp"

namespace equiconv {

struct RemainderSequences {
  int n_first = 1;
  std::vector<std::vector<cplx>> phi;  // y_n - sqrt(2/pi) sin n.
  std::vector<std::vector<cplx>> psi;  // w_n - sqrt(2/pi) sin n.
  std::vector<std::vector<cplx>> eta;  // y_n^[1]/n - sqrt(2/pi) cos n.
  std::vector<double> gamma;           // sup|phi_n| + sup|psi_n| + sup|eta_n|

  std::size_t size() const { return gamma.size(); }
  int n(std::size_t i) const { return n_first + int(i); }
};

inline RemainderSequences remainders(const std::vector<Eigenpair>& pairs, const BiorthSystem& biorth,
                                     const Grid& grid, int n_lo, int n_hi) {
  if (n_lo < 1 || n_hi > int(pairs.size()) || n_hi > int(biorth.w.size()) || n_lo > n_hi)
    throw Error("remainders: n range outside the available eigenpairs");
  RemainderSequences r;
  r.n_first = n_lo;
  const auto& x = grid.nodes();
  for (int n = n_lo; n <= n_hi; ++n) {
    const Eigenpair& e = pairs[std::size_t(n - 1)];
    const auto& w = biorth.w[std::size_t(n - 1)];
    std::vector<cplx> phi(x.size()), psi(x.size()), eta(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = sine_norm * std::sin(n * x[i]);
      phi[i] = e.y[i] - s;
      psi[i] = w[i] - s;
      eta[i] = e.quasi[i] / double(n) - sine_norm * std::cos(n * x[i]);
    }
    r.gamma.push_back(sup_norm(phi) + sup_norm(psi) + sup_norm(eta));
    r.phi.push_back(std::move(phi));
    r.psi.push_back(std::move(psi));
    r.eta.push_back(std::move(eta));
  }
  return r;
}

namespace detail {

inline Sampled pointwise(const Sampled& f, const auto& op) {
  Sampled out;
  out.left.reserve(f.left.size());
  for (std::size_t i = 0; i < f.left.size(); ++i) out.left.push_back(op(i, f.left[i]));
  if (!f.right.empty()) {
    out.right.reserve(f.right.size());
    for (std::size_t i = 0; i < f.right.size(); ++i) out.right.push_back(op(i, f.right[i]));
  }
  return out;
}

// Running integrals A(x) = int_0^x u cos 2nt and B(x) = int_0^x u sin 2nt.
// Exact for step functions, Simpson otherwise.
inline std::pair<std::vector<cplx>, std::vector<cplx>> running_double_frequency(const L2Function& u, int n,
                                                                              const Grid& grid) {
  const auto& x = grid.nodes();
  const double k = 2.0 * n;
  if (u.is_piecewise_constant()) {
    const auto& pc = u.piecewise_constant();
    std::vector<cplx> A(x.size()), B(x.size());
    cplx accA = 0.0, accB = 0.0;
    std::size_t cell = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      while (cell + 1 < pc.values.size() && pc.breakpoints[cell + 1] <= x[i]) {
        const double a = pc.breakpoints[cell], b = pc.breakpoints[cell + 1];
        accA += pc.values[cell] * (std::sin(k * b) - std::sin(k * a)) / k;
        accB += pc.values[cell] * (std::cos(k * a) - std::cos(k * b)) / k;
        ++cell;
      }
      const double a = pc.breakpoints[cell];
      A[i] = accA + pc.values[cell] * (std::sin(k * x[i]) - std::sin(k * a)) / k;
      B[i] = accB + pc.values[cell] * (std::cos(k * a) - std::cos(k * x[i])) / k;
    }
    return {A, B};
  }
  const Sampled us = sample(u, grid);
  const auto A = grid.cumulative(pointwise(us, [&](std::size_t i, cplx v) { return v * std::cos(k * x[i]); }));
  const auto B = grid.cumulative(pointwise(us, [&](std::size_t i, cplx v) { return v * std::sin(k * x[i]); }));
  return {A, B};
}

}  // namespace detail

// int_0^x u(t) sin n(x - 2t) dt = sin(nx) A(x) - cos(nx) B(x).
inline std::vector<cplx> convolution_term(const L2Function& u, int n, const Grid& grid) {
  const auto [A, B] = detail::running_double_frequency(u, n, grid);
  const auto& x = grid.nodes();
  std::vector<cplx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::sin(n * x[i]) * A[i] - std::cos(n * x[i]) * B[i];
  return out;
}

// psi_{n,0}(x) = alpha sin nx + beta cos nx - int_0^x u(t) sin n(x - 2t) dt
inline std::vector<cplx> psi0_model(const L2Function& u, int n, cplx alpha, cplx beta, const Grid& grid) {
  auto out = convolution_term(u, n, grid);
  const auto& x = grid.nodes();
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = alpha * std::sin(n * x[i]) + beta * std::cos(n * x[i]) - out[i];
  return out;
}

// psi_{n,1} split into its part linear in u and its part quadratic in u.
struct Psi1Terms {
  std::vector<cplx> linear;
  std::vector<cplx> quadratic;

  std::vector<cplx> total() const {
    std::vector<cplx> t(linear.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = linear[i] + quadratic[i];
    return t;
  }
};

// The six terms of psi_{n,1}:
//   sin nx (-1/(2n) int_0^x u^2 sin 2nt)
//   + cos nx ( -x/pi int_0^pi u sin 2nt
//              + x/(2 pi n) int_0^pi u^2 (cos 2nt - 1)
//              - 2x/pi int_0^pi int_0^t u(t) u(s) cos 2nt sin 2ns ds dt
//              + 1/(2n) int_0^x u^2 (1 - cos 2nt)
//              + 2 int_0^x int_0^t u(t) u(s) cos 2nt sin 2ns ds dt )
inline Psi1Terms psi1_terms(const L2Function& u, int n, const Grid& grid) {
  if (n < 1) throw DomainError("psi1_model: n must be >= 1");
  const auto& x = grid.nodes();
  const double k = 2.0 * n;
  const Sampled us = sample(u, grid);
  const Sampled u2 = detail::pointwise(us, [](std::size_t, cplx v) { return v * v; });

  const auto u2_sin = grid.cumulative(detail::pointwise(u2, [&](std::size_t i, cplx v) { return v * std::sin(k * x[i]); }));
  const auto u2_one_minus_cos =
      grid.cumulative(detail::pointwise(u2, [&](std::size_t i, cplx v) { return v * (1.0 - std::cos(k * x[i])); }));
  const auto [u_cos, u_sin] = detail::running_double_frequency(u, n, grid);
  // Inner integral I(t) = int_0^t u(s) sin 2ns ds is continuous; the outer
  // integrand u(t) cos 2nt I(t) inherits the jumps of u.
  const auto dbl = grid.cumulative(
      detail::pointwise(us, [&](std::size_t i, cplx v) { return v * std::cos(k * x[i]) * u_sin[i]; }));

  const std::size_t last = x.size() - 1;
  const cplx lin_full = u_sin[last];                // int_0^pi u sin 2nt
  const cplx quad_full = -u2_one_minus_cos[last];   // int_0^pi u^2 (cos 2nt - 1)
  const cplx dbl_full = dbl[last];

  Psi1Terms t;
  t.linear.resize(x.size());
  t.quadratic.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = std::sin(n * x[i]), c = std::cos(n * x[i]), xi = x[i];
    t.linear[i] = c * (-xi / pi * lin_full);
    t.quadratic[i] = s * (-1.0 / k * u2_sin[i]) +
                     c * (xi / (2.0 * pi * n) * quad_full - 2.0 * xi / pi * dbl_full + 1.0 / k * u2_one_minus_cos[i] +
                          2.0 * dbl[i]);
  }
  return t;
}

inline std::vector<cplx> psi1_model(const L2Function& u, int n, const Grid& grid) {
  return psi1_terms(u, n, grid).total();
}

struct SplitFit {
  int n = 0;
  cplx alpha, beta;
  double psi2_norm = 0.0;  // sup |psi_{n,2}|
};

// The model terms describe psi_n / sqrt(2/pi) for the biorthogonal functions
// w_n = conj(y_n)/conj(kappa_n), whose first-order correction carries conj(u).
// (alpha_n, beta_n) is the L2 least-squares projection of
// psi_n / sqrt(2/pi) + conv - psi_{n,1} onto span{sin n., cos n.}, and
// psi_{n,2} = psi_n - sqrt(2/pi) (psi_{n,0} + psi_{n,1}).
inline std::vector<SplitFit> fit_and_split(const RemainderSequences& seq, const L2Function& u, const Grid& grid) {
  const L2Function ubar = conjugate(u);
  const auto& x = grid.nodes();
  std::vector<SplitFit> out;
  for (std::size_t idx = 0; idx < seq.size(); ++idx) {
    const int n = seq.n(idx);
    const auto conv = convolution_term(ubar, n, grid);
    const auto p1 = psi1_model(ubar, n, grid);
    std::vector<cplx> target(x.size()), sn(x.size()), cs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      target[i] = seq.psi[idx][i] / sine_norm + conv[i] - p1[i];
      sn[i] = std::sin(n * x[i]);
      cs[i] = std::cos(n * x[i]);
    }
    // Normal equations: sum_j a_j (b_j, b_i) = (target, b_i).
    Eigen::Matrix2cd gram;
    gram << grid.inner(sn, sn), grid.inner(cs, sn), grid.inner(sn, cs), grid.inner(cs, cs);
    Eigen::Vector2cd rhs(grid.inner(target, sn), grid.inner(target, cs));
    const Eigen::Vector2cd ab = gram.fullPivLu().solve(rhs);
    SplitFit fit{n, ab(0), ab(1), 0.0};
    const auto p0 = psi0_model(ubar, n, fit.alpha, fit.beta, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      worst = std::max(worst, std::abs(seq.psi[idx][i] - sine_norm * (p0[i] + p1[i])));
    fit.psi2_norm = worst;
    out.push_back(fit);
  }
  return out;
}

}  // namespace equiconv
