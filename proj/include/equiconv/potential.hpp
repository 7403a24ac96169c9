#pragma once

// Closed-form functions on [0, pi]: the primitive u of a distributional
// potential q = u', and target functions f for expansions.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"

namespace equiconv {

// Step function.  breakpoints = {0, b_1, ..., pi}, one value per cell.
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<cplx> values;
};

// Continuous interpolant through (nodes[i], values[i]); nodes span [0, pi].
struct PiecewiseLinear {
  std::vector<double> nodes;
  std::vector<cplx> values;
};

// u(x) = sum_{k>=1} sine[k-1] sin(kx) + sum_{k>=0} cosine[k] cos(kx).
struct FiniteFourier {
  std::vector<cplx> sine;
  std::vector<cplx> cosine;
};

class L2Function {
 public:
  using Kind = std::variant<PiecewiseConstant, PiecewiseLinear, FiniteFourier>;

  L2Function(Kind kind, std::string label) : kind_(std::move(kind)), label_(std::move(label)) {
    validate();
    real_ = std::visit([](const auto& k) { return all_real(k); }, kind_);
  }

  const Kind& kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }

  // True when every stored coefficient has an exactly zero imaginary part.
  bool is_real() const noexcept { return real_; }

  bool is_piecewise_constant() const noexcept {
    return std::holds_alternative<PiecewiseConstant>(kind_);
  }
  const PiecewiseConstant& piecewise_constant() const { return std::get<PiecewiseConstant>(kind_); }

  // Interior points where the function or its derivative may jump, plus 0 and pi.
  std::vector<double> breakpoints() const {
    if (auto* pc = std::get_if<PiecewiseConstant>(&kind_)) return pc->breakpoints;
    if (auto* pl = std::get_if<PiecewiseLinear>(&kind_)) return pl->nodes;
    return {0.0, pi};
  }

 private:
  static bool all_real(const std::vector<cplx>& v) {
    return std::all_of(v.begin(), v.end(), [](cplx z) { return z.imag() == 0.0; });
  }
  static bool all_real(const PiecewiseConstant& k) { return all_real(k.values); }
  static bool all_real(const PiecewiseLinear& k) { return all_real(k.values); }
  static bool all_real(const FiniteFourier& k) { return all_real(k.sine) && all_real(k.cosine); }

  static void check_mesh(const std::vector<double>& mesh, const char* what) {
    if (mesh.size() < 2) throw DomainError(std::string(what) + ": need at least two points");
    if (mesh.front() != 0.0 || std::abs(mesh.back() - pi) > 1e-14)
      throw DomainError(std::string(what) + ": must start at 0 and end at pi");
    for (std::size_t i = 1; i < mesh.size(); ++i)
      if (!(mesh[i] > mesh[i - 1])) throw DomainError(std::string(what) + ": not strictly increasing");
  }

  void validate() {
    if (auto* pc = std::get_if<PiecewiseConstant>(&kind_)) {
      check_mesh(pc->breakpoints, "piecewise_constant breakpoints");
      if (pc->values.size() + 1 != pc->breakpoints.size())
        throw DomainError("piecewise_constant: need one value per cell");
      pc->breakpoints.back() = pi;
    } else if (auto* pl = std::get_if<PiecewiseLinear>(&kind_)) {
      check_mesh(pl->nodes, "piecewise_linear nodes");
      if (pl->values.size() != pl->nodes.size())
        throw DomainError("piecewise_linear: need one value per node");
      pl->nodes.back() = pi;
    }
  }

  Kind kind_;
  std::string label_;
  bool real_ = true;
};

using Potential = L2Function;
using TargetFunction = L2Function;

// ---------------------------------------------------------------------------
// Factories

inline L2Function make_constant(cplx c, std::string label = "constant") {
  return {PiecewiseConstant{{0.0, pi}, {c}}, std::move(label)};
}

// c * chi_[a, pi]; as a primitive this is the potential q = c * delta_a.
inline L2Function make_step(cplx c, double a, std::string label = "step") {
  if (!(a > 0.0 && a < pi)) throw DomainError("make_step: jump point must lie in (0, pi)");
  return {PiecewiseConstant{{0.0, a, pi}, {cplx{0.0}, c}}, std::move(label)};
}

// chi_[0, b]
inline L2Function make_indicator(double b, std::string label = "indicator") {
  if (!(b > 0.0 && b <= pi)) throw DomainError("make_indicator: b must lie in (0, pi]");
  if (b == pi) return make_constant(1.0, std::move(label));
  return {PiecewiseConstant{{0.0, b, pi}, {cplx{1.0}, cplx{0.0}}}, std::move(label)};
}

inline L2Function make_sine_series(std::vector<cplx> coeffs, std::string label = "sine_series") {
  return {FiniteFourier{std::move(coeffs), {}}, std::move(label)};
}

// ---------------------------------------------------------------------------
// Pointwise evaluation

namespace detail {

// Cell index i with b_i < x <= b_{i+1} (cell 0 for x == 0).
inline std::size_t cell_left(const std::vector<double>& breaks, double x) {
  auto it = std::lower_bound(breaks.begin() + 1, breaks.end() - 1, x);
  return static_cast<std::size_t>(it - (breaks.begin() + 1));
}

// Cell index i with b_i <= x < b_{i+1} (last cell for x == pi).
inline std::size_t cell_right(const std::vector<double>& breaks, double x) {
  auto it = std::upper_bound(breaks.begin() + 1, breaks.end() - 1, x);
  return static_cast<std::size_t>(it - (breaks.begin() + 1));
}

inline cplx eval_linear(const PiecewiseLinear& pl, double x) {
  const std::size_t i = cell_left(pl.nodes, x);
  const double a = pl.nodes[i], b = pl.nodes[i + 1];
  const double t = (x - a) / (b - a);
  return pl.values[i] * (1.0 - t) + pl.values[i + 1] * t;
}

inline cplx eval_fourier(const FiniteFourier& ff, double x) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < ff.sine.size(); ++k) s += ff.sine[k] * std::sin(double(k + 1) * x);
  for (std::size_t k = 0; k < ff.cosine.size(); ++k) s += ff.cosine[k] * std::cos(double(k) * x);
  return s;
}

inline void check_domain(double x) {
  if (!(x >= 0.0 && x <= pi)) throw DomainError("evaluation point outside [0, pi]: " + std::to_string(x));
}

}  // namespace detail

// Left-continuous representative at interior jumps.
inline cplx eval_u(const L2Function& p, double x) {
  detail::check_domain(x);
  return std::visit(
      [x](const auto& k) -> cplx {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PiecewiseConstant>)
          return k.values[detail::cell_left(k.breakpoints, x)];
        else if constexpr (std::is_same_v<K, PiecewiseLinear>)
          return detail::eval_linear(k, x);
        else
          return detail::eval_fourier(k, x);
      },
      p.kind());
}

// Right limit; differs from eval_u only at the jumps of a step function.
inline cplx eval_right(const L2Function& p, double x) {
  detail::check_domain(x);
  if (auto* pc = std::get_if<PiecewiseConstant>(&p.kind()))
    return pc->values[detail::cell_right(pc->breakpoints, x)];
  return eval_u(p, x);
}

// ---------------------------------------------------------------------------
// Norms and projections

namespace detail {

// int_0^pi sin(jx) cos(kx) dx for j >= 1, k >= 0.
inline double sin_cos_integral(int j, int k) {
  if (j == k) return 0.0;
  if ((j + k) % 2 == 0) return 0.0;
  return 2.0 * j / double(j * j - k * k);
}

}  // namespace detail

inline double l2_norm(const L2Function& p) {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        double sq = 0.0;
        if constexpr (std::is_same_v<K, PiecewiseConstant>) {
          for (std::size_t i = 0; i < k.values.size(); ++i)
            sq += std::norm(k.values[i]) * (k.breakpoints[i + 1] - k.breakpoints[i]);
        } else if constexpr (std::is_same_v<K, PiecewiseLinear>) {
          for (std::size_t i = 0; i + 1 < k.nodes.size(); ++i) {
            const cplx a = k.values[i], b = k.values[i + 1];
            const double h = k.nodes[i + 1] - k.nodes[i];
            sq += h / 3.0 * (std::norm(a) + (a * std::conj(b)).real() + std::norm(b));
          }
        } else {
          // Hermitian form with the exact Gram matrix of {sin jx} u {cos kx}.
          for (const cplx& a : k.sine) sq += std::norm(a) * pi / 2.0;
          for (std::size_t c = 0; c < k.cosine.size(); ++c)
            sq += std::norm(k.cosine[c]) * (c == 0 ? pi : pi / 2.0);
          for (std::size_t j = 0; j < k.sine.size(); ++j)
            for (std::size_t c = 0; c < k.cosine.size(); ++c)
              sq += 2.0 * (k.sine[j] * std::conj(k.cosine[c])).real() *
                    detail::sin_cos_integral(int(j + 1), int(c));
        }
        return std::sqrt(std::max(sq, 0.0));
      },
      p.kind());
}

// Exact integral of p over [a, b] (0 <= a <= b <= pi).
inline cplx integral(const L2Function& p, double a, double b) {
  return std::visit(
      [a, b](const auto& k) -> cplx {
        using K = std::decay_t<decltype(k)>;
        cplx s = 0.0;
        if constexpr (std::is_same_v<K, PiecewiseConstant>) {
          for (std::size_t i = 0; i < k.values.size(); ++i) {
            const double lo = std::max(a, k.breakpoints[i]), hi = std::min(b, k.breakpoints[i + 1]);
            if (hi > lo) s += k.values[i] * (hi - lo);
          }
        } else if constexpr (std::is_same_v<K, PiecewiseLinear>) {
          for (std::size_t i = 0; i + 1 < k.nodes.size(); ++i) {
            const double lo = std::max(a, k.nodes[i]), hi = std::min(b, k.nodes[i + 1]);
            if (hi > lo) s += 0.5 * (hi - lo) * (detail::eval_linear(k, lo) + detail::eval_linear(k, hi));
          }
        } else {
          for (std::size_t j = 0; j < k.sine.size(); ++j) {
            const double n = double(j + 1);
            s += k.sine[j] * (std::cos(n * a) - std::cos(n * b)) / n;
          }
          for (std::size_t c = 0; c < k.cosine.size(); ++c) {
            if (c == 0)
              s += k.cosine[0] * (b - a);
            else
              s += k.cosine[c] * (std::sin(double(c) * b) - std::sin(double(c) * a)) / double(c);
          }
        }
        return s;
      },
      p.kind());
}

inline std::vector<double> uniform_mesh(int K) {
  std::vector<double> mesh(std::size_t(K) + 1);
  for (int j = 0; j <= K; ++j) mesh[std::size_t(j)] = pi * j / K;
  mesh.back() = pi;
  return mesh;
}

// Cell-average projection onto K uniform cells.
inline L2Function to_piecewise_constant(const L2Function& p, int K) {
  if (K < 1) throw DomainError("to_piecewise_constant: K must be >= 1");
  PiecewiseConstant out{uniform_mesh(K), {}};
  out.values.reserve(std::size_t(K));
  for (int j = 0; j < K; ++j) {
    const double a = out.breakpoints[std::size_t(j)], b = out.breakpoints[std::size_t(j) + 1];
    cplx avg = integral(p, a, b) / (b - a);
    if (p.is_real()) avg.imag(0.0);
    out.values.push_back(avg);
  }
  return {std::move(out), p.label() + "@K" + std::to_string(K)};
}

// Splits the cells of a step function along the uniform K-mesh without changing
// the function; used to test that propagation is insensitive to cell splitting.
inline L2Function refine_to_mesh(const L2Function& p, int K) {
  const auto& pc = p.piecewise_constant();
  std::vector<double> pts = pc.breakpoints;
  for (double x : uniform_mesh(K)) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  std::vector<double> mesh;
  for (double x : pts)
    if (mesh.empty() || x - mesh.back() > 1e-12) mesh.push_back(x);
  mesh.back() = pi;
  PiecewiseConstant out{mesh, {}};
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i)
    out.values.push_back(eval_u(p, 0.5 * (mesh[i] + mesh[i + 1])));
  return {std::move(out), p.label()};
}

// The representation the shooting code runs on: step functions pass through,
// everything else is projected onto K cells.
inline L2Function discretize(const L2Function& p, int K) {
  if (p.is_piecewise_constant()) return p;
  return to_piecewise_constant(p, K);
}

inline L2Function conjugate(const L2Function& p) {
  auto conj_all = [](std::vector<cplx> v) {
    for (auto& z : v) z = std::conj(z);
    return v;
  };
  return std::visit(
      [&](const auto& k) -> L2Function {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PiecewiseConstant>)
          return {PiecewiseConstant{k.breakpoints, conj_all(k.values)}, p.label()};
        else if constexpr (std::is_same_v<K, PiecewiseLinear>)
          return {PiecewiseLinear{k.nodes, conj_all(k.values)}, p.label()};
        else
          return {FiniteFourier{conj_all(k.sine), conj_all(k.cosine)}, p.label()};
      },
      p.kind());
}

inline L2Function scaled(const L2Function& p, cplx s) {
  auto scale_all = [s](std::vector<cplx> v) {
    for (auto& z : v) z *= s;
    return v;
  };
  return std::visit(
      [&](const auto& k) -> L2Function {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PiecewiseConstant>)
          return {PiecewiseConstant{k.breakpoints, scale_all(k.values)}, p.label()};
        else if constexpr (std::is_same_v<K, PiecewiseLinear>)
          return {PiecewiseLinear{k.nodes, scale_all(k.values)}, p.label()};
        else
          return {FiniteFourier{scale_all(k.sine), scale_all(k.cosine)}, p.label()};
      },
      p.kind());
}

}  // namespace equiconv
