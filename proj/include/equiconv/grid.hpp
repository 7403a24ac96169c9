#pragma once

// Composite Simpson quadrature on breakpoint-aligned panels.  This is the one
// inner-product rule used throughout the library.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "potential.hpp"

namespace equiconv {

// Samples of a possibly discontinuous function at the grid nodes.  left holds
// the left limits (the pointwise value), right the right limits; right is
// empty for continuous functions.
struct Sampled {
  std::vector<cplx> left;
  std::vector<cplx> right;

  const cplx& at_panel_start(std::size_t i) const { return right.empty() ? left[i] : right[i]; }
};

// Nodes 0 = x_0 < x_1 < ... < x_{2P} = pi; node 2k+1 is the midpoint of panel k.
// Copies share the node storage.
class Grid {
 public:
  Grid() = default;

  explicit Grid(std::vector<double> panel_ends) {
    auto d = std::make_shared<Data>();
    const std::size_t P = panel_ends.size() - 1;
    d->nodes.resize(2 * P + 1);
    d->weights.assign(2 * P + 1, 0.0);
    for (std::size_t k = 0; k < P; ++k) {
      const double a = panel_ends[k], b = panel_ends[k + 1];
      const double h = 0.5 * (b - a);
      d->nodes[2 * k] = a;
      d->nodes[2 * k + 1] = a + h;
      d->weights[2 * k] += h / 3.0;
      d->weights[2 * k + 1] += 4.0 * h / 3.0;
      d->weights[2 * k + 2] += h / 3.0;
    }
    d->nodes[2 * P] = panel_ends.back();
    data_ = std::move(d);
  }

  const std::vector<double>& nodes() const { return data_->nodes; }
  const std::vector<double>& weights() const { return data_->weights; }
  std::size_t size() const { return data_->nodes.size(); }
  std::size_t panels() const { return (size() - 1) / 2; }
  // Number of sub-intervals (twice the panel count).
  int intervals() const { return int(size()) - 1; }

  bool same_as(const Grid& other) const {
    return data_ == other.data_ || (data_ && other.data_ && data_->nodes == other.data_->nodes);
  }

  // Simpson sum with panel-local values: value(k, j) for j in {0, 1, 2}.
  template <class F>
  cplx integrate_panels(F&& value) const {
    cplx s = 0.0;
    const auto& x = nodes();
    for (std::size_t k = 0; k < panels(); ++k) {
      const double h = x[2 * k + 1] - x[2 * k];
      s += h / 3.0 * (value(k, 0) + 4.0 * value(k, 1) + value(k, 2));
    }
    return s;
  }

  cplx integrate(std::span<const cplx> f) const {
    cplx s = 0.0;
    const auto& w = weights();
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
    return s;
  }

  cplx integrate(const Sampled& f) const {
    if (f.right.empty()) return integrate(f.left);
    return integrate_panels([&](std::size_t k, int j) -> cplx {
      const std::size_t i = 2 * k + std::size_t(j);
      return j == 0 ? f.right[i] : f.left[i];
    });
  }

  // (f, g) = int f conj(g)
  cplx inner(std::span<const cplx> f, std::span<const cplx> g) const {
    cplx s = 0.0;
    const auto& w = weights();
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * std::conj(g[i]);
    return s;
  }

  cplx inner(const Sampled& f, std::span<const cplx> g) const {
    if (f.right.empty()) return inner(f.left, g);
    return integrate_panels([&](std::size_t k, int j) -> cplx {
      const std::size_t i = 2 * k + std::size_t(j);
      return (j == 0 ? f.right[i] : f.left[i]) * std::conj(g[i]);
    });
  }

  double norm(std::span<const cplx> f) const { return std::sqrt(std::max(inner(f, f).real(), 0.0)); }

  // Running integral F(x_i) = int_0^{x_i} f.  Midpoint values use the partial
  // Simpson rule h/12 (5 f0 + 8 f1 - f2).
  std::vector<cplx> cumulative(const Sampled& f) const {
    const auto& x = nodes();
    std::vector<cplx> F(size(), cplx{0.0});
    for (std::size_t k = 0; k < panels(); ++k) {
      const double h = x[2 * k + 1] - x[2 * k];
      const cplx f0 = f.at_panel_start(2 * k), f1 = f.left[2 * k + 1], f2 = f.left[2 * k + 2];
      F[2 * k + 1] = F[2 * k] + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
      F[2 * k + 2] = F[2 * k] + h / 3.0 * (f0 + 4.0 * f1 + f2);
    }
    return F;
  }

  std::vector<cplx> cumulative(std::span<const cplx> f) const {
    return cumulative(Sampled{{f.begin(), f.end()}, {}});
  }

 private:
  struct Data {
    std::vector<double> nodes;
    std::vector<double> weights;
  };
  std::shared_ptr<const Data> data_;
};

// Uniform grid of M sub-intervals (M/2 Simpson panels), with every supplied
// breakpoint promoted to a panel end.  Breakpoints closer than 1e-12 to an
// existing panel end are snapped onto it.
inline Grid build_grid(std::span<const std::vector<double>> breakpoint_sets, int M) {
  if (M < 2 || M % 2 != 0) throw DomainError("build_grid: M must be even and >= 2");
  const int P = M / 2;
  std::vector<double> pts;
  for (int k = 0; k <= P; ++k) pts.push_back(pi * k / P);
  for (const auto& set : breakpoint_sets)
    for (double b : set) {
      if (!(b >= 0.0 && b <= pi)) throw DomainError("build_grid: breakpoint outside [0, pi]");
      pts.push_back(b);
    }
  std::sort(pts.begin(), pts.end());
  std::vector<double> ends;
  for (double x : pts)
    if (ends.empty() || x - ends.back() > 1e-12) ends.push_back(x);
  ends.front() = 0.0;
  if (pi - ends.back() <= 1e-12) ends.back() = pi;
  return Grid(std::move(ends));
}

inline Grid build_grid(std::initializer_list<std::vector<double>> sets, int M) {
  std::vector<std::vector<double>> v(sets);
  return build_grid(std::span<const std::vector<double>>(v), M);
}

inline Grid build_grid(int M) { return build_grid(std::span<const std::vector<double>>{}, M); }

// Grid carrying the breakpoints of every listed function.
inline Grid grid_for(std::initializer_list<const L2Function*> functions, int M) {
  std::vector<std::vector<double>> sets;
  for (const auto* f : functions) sets.push_back(f->breakpoints());
  return build_grid(std::span<const std::vector<double>>(sets), M);
}

inline Sampled sample(const L2Function& f, const Grid& grid) {
  Sampled s;
  const auto& x = grid.nodes();
  s.left.reserve(x.size());
  for (double xi : x) s.left.push_back(eval_u(f, xi));
  if (f.is_piecewise_constant()) {
    s.right.reserve(x.size());
    for (double xi : x) s.right.push_back(eval_right(f, xi));
  }
  return s;
}

inline double sup_norm(std::span<const cplx> f) {
  double m = 0.0;
  for (const cplx& z : f) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace equiconv
