#pragma once

// Expansions of a target f in the eigenfunctions y_n and in the sine system,
// the equiconvergence difference B_m f, and the rate report.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cellwise.hpp"
#include "grid.hpp"
#include "spectrum.hpp"

namespace equiconv {

namespace detail {

// int_a^b x sin(nx) dx
inline double x_sin_integral(double n, double a, double b) {
  auto F = [n](double x) { return -x * std::cos(n * x) / n + std::sin(n * x) / (n * n); };
  return F(b) - F(a);
}

// sqrt(2/pi) (f, sin n.) from the closed form of f.
inline cplx exact_sine_coefficient(const L2Function& f, int n) {
  const double nn = n;
  const cplx s = std::visit(
      [nn, n](const auto& k) -> cplx {
        using K = std::decay_t<decltype(k)>;
        cplx acc = 0.0;
        if constexpr (std::is_same_v<K, PiecewiseConstant>) {
          for (std::size_t i = 0; i < k.values.size(); ++i)
            acc += k.values[i] * (std::cos(nn * k.breakpoints[i]) - std::cos(nn * k.breakpoints[i + 1])) / nn;
        } else if constexpr (std::is_same_v<K, PiecewiseLinear>) {
          for (std::size_t i = 0; i + 1 < k.nodes.size(); ++i) {
            const double a = k.nodes[i], b = k.nodes[i + 1];
            const cplx slope = (k.values[i + 1] - k.values[i]) / (b - a);
            const cplx offset = k.values[i] - slope * a;
            acc += offset * (std::cos(nn * a) - std::cos(nn * b)) / nn + slope * x_sin_integral(nn, a, b);
          }
        } else {
          if (std::size_t(n) <= k.sine.size()) acc += k.sine[std::size_t(n - 1)] * (pi / 2.0);
          for (std::size_t c = 0; c < k.cosine.size(); ++c) acc += k.cosine[c] * sin_cos_integral(n, int(c));
        }
        return acc;
      },
      f.kind());
  return sine_norm * s;
}

}  // namespace detail

// c_{n,0} = sqrt(2/pi) (f, sin n.) for n = 1..n_max (index n-1).
inline std::vector<cplx> sine_coeffs(const L2Function& f, const Grid& grid, int n_max) {
  if (grid.intervals() < 8 * n_max)
    throw ResolutionError("sine_coeffs: grid does not resolve sin(n_max x)", 8 * n_max);
  std::vector<cplx> c0;
  c0.reserve(std::size_t(n_max));
  for (int n = 1; n <= n_max; ++n) c0.push_back(detail::exact_sine_coefficient(f, n));
  return c0;
}

// c_n = (f, w_n) = int f y_n / kappa_n.  Closed form per sub-interval when
// the grid carries every breakpoint of f and of the potential, Simpson
// otherwise.
inline std::vector<cplx> sl_coeffs(const L2Function& f, const BiorthSystem& biorth, const Grid& grid) {
  if (!grid.same_as(biorth.grid)) throw GridMismatchError("sl_coeffs: biorthogonal system lives on another grid");
  std::vector<cplx> c;
  c.reserve(biorth.w.size());
  std::optional<cellwise::LocalTerms> terms;
  if (biorth.potential && biorth.quasi.size() == biorth.w.size()) terms = cellwise::local_terms(f, grid);
  std::optional<Sampled> fs;
  std::vector<cplx> y;
  for (std::size_t n = 0; n < biorth.w.size(); ++n) {
    if (terms) {
      y.resize(biorth.w[n].size());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = biorth.kappa[n] * std::conj(biorth.w[n][i]);
      if (auto amp = cellwise::amplitudes(y, biorth.quasi[n], biorth.lambda[n], *biorth.potential, grid)) {
        c.push_back(cellwise::integrate_product(*terms, *amp, grid) / biorth.kappa[n]);
        continue;
      }
    }
    if (!fs) fs = sample(f, grid);
    c.push_back(grid.inner(*fs, biorth.w[n]));
  }
  return c;
}

struct ExpansionSet {
  std::vector<cplx> c;   // c_n = (f, w_n)
  std::vector<cplx> c0;  // c_{n,0}
  int n_max = 0;
  double f_norm = 0.0;   // closed-form ||f||
  // sum_{n >= N} |c_{n,0}|^2 over all n (not just n <= n_max).
  double tail_squared(int N) const { return tail_fn(N); }
  std::function<double(int)> tail_fn;
};

// Tail of the full sine series beyond N-1 terms.  Finite sine polynomials are
// summed directly; everything else goes through Parseval with the exact norm.
inline std::function<double(int)> sine_tail(const L2Function& f) {
  if (auto* ff = std::get_if<FiniteFourier>(&f.kind()); ff && ff->cosine.empty()) {
    std::vector<double> sq;
    for (const cplx& a : ff->sine) sq.push_back(std::norm(sine_norm * a * (pi / 2.0)));
    return [sq](int N) {
      double s = 0.0;
      for (std::size_t k = std::size_t(std::max(N, 1)); k <= sq.size(); ++k) s += sq[k - 1];
      return s;
    };
  }
  const double norm_sq = std::pow(l2_norm(f), 2);
  return [f, norm_sq](int N) {
    double head = 0.0;
    for (int n = 1; n < N; ++n) head += std::norm(detail::exact_sine_coefficient(f, n));
    return std::max(0.0, norm_sq - head);
  };
}

inline ExpansionSet expand(const L2Function& f, const BiorthSystem& biorth, const Grid& grid) {
  ExpansionSet e;
  e.n_max = int(biorth.w.size());
  e.c = sl_coeffs(f, biorth, grid);
  e.c0 = sine_coeffs(f, grid, e.n_max);
  e.f_norm = l2_norm(f);
  e.tail_fn = sine_tail(f);
  return e;
}

struct EquiconvSample {
  std::vector<cplx> values;  // B_m f at the grid nodes
  double supnorm = 0.0;
};

// B_m f for every m in m_list (increasing) in one accumulation pass.
inline std::vector<EquiconvSample> equiconv_diffs(const ExpansionSet& e, const std::vector<Eigenpair>& pairs,
                                                  const std::vector<int>& m_list, const Grid& grid) {
  const auto& x = grid.nodes();
  std::vector<cplx> acc(x.size(), cplx{0.0});
  std::vector<EquiconvSample> out;
  int done = 0;
  for (int m : m_list) {
    if (m > int(pairs.size()) || m > e.n_max)
      throw Error("equiconv_diff: m = " + std::to_string(m) + " exceeds the available eigenpairs (" +
                  std::to_string(std::min<std::size_t>(pairs.size(), std::size_t(e.n_max))) + ")");
    if (m < done) throw Error("equiconv_diff: m_list must be increasing");
    for (int n = done + 1; n <= m; ++n) {
      const auto& y = pairs[std::size_t(n - 1)].y;
      const cplx cn = e.c[std::size_t(n - 1)];
      const cplx c0 = e.c0[std::size_t(n - 1)] * sine_norm;
      for (std::size_t i = 0; i < x.size(); ++i) acc[i] += cn * y[i] - c0 * std::sin(n * x[i]);
    }
    done = m;
    out.push_back({acc, sup_norm(acc)});
  }
  return out;
}

inline EquiconvSample equiconv_diff(const L2Function& f, const std::vector<Eigenpair>& pairs,
                                    const BiorthSystem& biorth, int m, const Grid& grid) {
  if (m == 0) return {std::vector<cplx>(grid.size(), cplx{0.0}), 0.0};
  return equiconv_diffs(expand(f, biorth, grid), pairs, {m}, grid).front();
}

struct EquiconvReport {
  std::vector<int> m;
  std::vector<double> supnorm;
  std::vector<double> tail;     // T(m) = (sum_{n >= ceil(sqrt m)} |c_{n,0}|^2)^{1/2}
  double c_hat = 0.0;
  std::vector<double> upsilon;  // max(0, supnorm - c_hat T) / ||f||
  bool upsilon_decreasing = false;
  double f_norm = 0.0;
  std::size_t grid_nodes = 0;
};

inline int tail_start(int m) {
  int N = int(std::ceil(std::sqrt(double(m))));
  while (N * N < m) ++N;
  while (N > 1 && (N - 1) * (N - 1) >= m) --N;
  return N;
}

// Least squares supnorm ~ c_hat T over the larger half of m_list; the residual
// is the reported upsilon.  Both are diagnostics, not certified constants.
inline EquiconvReport equiconv_report(const ExpansionSet& e, const std::vector<Eigenpair>& pairs,
                                      const std::vector<int>& m_list, const Grid& grid) {
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1]) throw Error("equiconv_report: m_list must be strictly increasing");
  EquiconvReport r;
  r.m = m_list;
  r.f_norm = e.f_norm;
  r.grid_nodes = grid.size();
  for (const auto& s : equiconv_diffs(e, pairs, m_list, grid)) r.supnorm.push_back(s.supnorm);
  for (int m : m_list) r.tail.push_back(std::sqrt(e.tail_squared(tail_start(m))));

  const std::size_t k = m_list.size();
  const std::size_t first = k / 2;
  double st = 0.0, tt = 0.0;
  for (std::size_t i = first; i < k; ++i) {
    st += r.supnorm[i] * r.tail[i];
    tt += r.tail[i] * r.tail[i];
  }
  r.c_hat = tt > 0.0 ? std::max(0.0, st / tt) : 0.0;
  for (std::size_t i = 0; i < k; ++i)
    r.upsilon.push_back(e.f_norm > 0.0 ? std::max(0.0, r.supnorm[i] - r.c_hat * r.tail[i]) / e.f_norm : 0.0);

  r.upsilon_decreasing = true;
  for (std::size_t i = k >= 3 ? k - 2 : 1; i < k; ++i)
    if (r.upsilon[i] > r.upsilon[i - 1]) r.upsilon_decreasing = false;
  return r;
}

inline EquiconvReport equiconv_report(const L2Function& f, const std::vector<Eigenpair>& pairs,
                                      const BiorthSystem& biorth, const std::vector<int>& m_list, const Grid& grid) {
  return equiconv_report(expand(f, biorth, grid), pairs, m_list, grid);
}

}  // namespace equiconv
