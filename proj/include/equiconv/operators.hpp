#pragma once

// Discretised Dirichlet-kernel operators on L2[0, pi]:
//
//   S_m v(t)        = int_0^pi v(s) D_m(t - 2s) ds
//   A_m u(t)        = int_0^t  u(s) D_m(t - 2s) ds
//   A_{m,-x} u(t)   = int_0^t  u(s) D_m(t - x - 2s) ds
//   Atilde_{m,x}u(t)= int_0^x  u(s) D_m(t - 2s) ds
//   E_m u(t)        = int_0^t  u(s) D_m(2t - s) ds
//   H_x u(t)        = chi_[0,x](t) u(t)
//
// A kernel k(t, s) becomes the symmetric-weighted Nystrom matrix
// W^{1/2} K W^{1/2}, whose spectral norm is the weighted-l2 operator norm.
// Truncations at s = t or s = x keep half the Simpson weight of the cut node.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grid.hpp"

namespace equiconv {

// D_m(xi) = 1/2 + sum_{n=1}^m cos(n xi)
inline double dirichlet_kernel(int m, double xi) {
  // Reduce to (-pi, pi]; D_m is 2 pi periodic.
  double r = std::remainder(xi, 2.0 * pi);
  if (std::abs(r) < 1e-6) {
    // Even series about 0: (m + 1/2) - sum n^2 r^2 / 2.
    const double mm = m;
    const double sum_n2 = mm * (mm + 1.0) * (2.0 * mm + 1.0) / 6.0;
    return (mm + 0.5) - 0.5 * sum_n2 * r * r;
  }
  return std::sin((m + 0.5) * r) / (2.0 * std::sin(0.5 * r));
}

// Direct summation; reference for the closed form.
inline double dirichlet_kernel_sum(int m, double xi) {
  double s = 0.5;
  for (int n = 1; n <= m; ++n) s += std::cos(n * xi);
  return s;
}

enum class KernelKind { S, A, A_shift, A_tilde, E, H };

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::S: return "S";
    case KernelKind::A: return "A";
    case KernelKind::A_shift: return "A_shift";
    case KernelKind::A_tilde: return "A_tilde";
    case KernelKind::E: return "E";
    case KernelKind::H: return "H";
  }
  return "?";
}

struct KernelOperatorMatrix {
  KernelKind kind;
  int m = 0;
  double x_param = 0.0;
  Eigen::MatrixXd matrix;  // W^{1/2} K W^{1/2}
  double norm = 0.0;
};

// Largest singular value by Golub-Kahan-Lanczos bidiagonalisation with full
// reorthogonalisation.  Stops once the estimate is stable to rel_tol.
inline double largest_singular_value(const Eigen::MatrixXd& B, double rel_tol = 1e-12, int max_steps = 300) {
  const Eigen::Index n = B.cols();
  if (n == 0 || B.rows() == 0) return 0.0;
  const int steps = int(std::min<Eigen::Index>(max_steps, std::min(B.rows(), n)));
  Eigen::MatrixXd V(n, steps + 1), U(B.rows(), steps);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) += 0.5 * std::sin(1.7 * double(i) + 0.3);
  v.normalize();
  V.col(0) = v;
  std::vector<double> alpha, beta;
  double previous = -1.0;
  int stable = 0;
  Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(B.rows());
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd u = B * V.col(k);
    if (k > 0) u -= beta.back() * u_prev;
    for (int j = 0; j < k; ++j) u -= U.col(j).dot(u) * U.col(j);
    const double a = u.norm();
    if (a == 0.0) return std::max(previous, 0.0);
    u /= a;
    U.col(k) = u;
    alpha.push_back(a);
    Eigen::VectorXd w = B.transpose() * u - a * V.col(k);
    for (int j = 0; j <= k; ++j) w -= V.col(j).dot(w) * V.col(j);
    const double b = w.norm();
    beta.push_back(b);
    u_prev = u;

    Eigen::MatrixXd bid = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int j = 0; j <= k; ++j) {
      bid(j, j) = alpha[std::size_t(j)];
      if (j < k) bid(j, j + 1) = beta[std::size_t(j)];
    }
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(bid).singularValues()(0);
    if (std::abs(sigma - previous) <= rel_tol * sigma) {
      if (++stable >= 3) return sigma;
    } else {
      stable = 0;
    }
    previous = sigma;
    if (b <= 1e-14 * sigma) return sigma;
    V.col(k + 1) = w / b;
  }
  return std::max(previous, 0.0);
}

inline bool is_volterra(KernelKind k) {
  return k == KernelKind::A || k == KernelKind::A_shift || k == KernelKind::E;
}

// Raw kernel value k(t, s) including the truncation factor (1, 1/2 or 0).
inline double kernel_value(KernelKind kind, int m, double x, double t, double s, bool diagonal) {
  switch (kind) {
    case KernelKind::S:
      return dirichlet_kernel(m, t - 2.0 * s);
    case KernelKind::A:
    case KernelKind::A_shift: {
      if (s > t && !diagonal) return 0.0;
      const double shift = kind == KernelKind::A_shift ? x : 0.0;
      return (diagonal ? 0.5 : 1.0) * dirichlet_kernel(m, t - shift - 2.0 * s);
    }
    case KernelKind::E:
      if (s > t && !diagonal) return 0.0;
      return (diagonal ? 0.5 : 1.0) * dirichlet_kernel(m, 2.0 * t - s);
    case KernelKind::A_tilde: {
      if (s > x + 1e-14) return 0.0;
      const double factor = std::abs(s - x) <= 1e-14 ? 0.5 : 1.0;
      return factor * dirichlet_kernel(m, t - 2.0 * s);
    }
    case KernelKind::H:
      return 0.0;
  }
  return 0.0;
}

// Refuses grids coarser than 16 m sub-intervals.
inline KernelOperatorMatrix kernel_operator(KernelKind kind, int m, double x_param, const Grid& grid,
                                            bool compute_norm = true) {
  if (grid.intervals() < 16 * std::max(m, 1))
    throw ResolutionError("kernel_operator: grid too coarse for D_" + std::to_string(m), 16 * std::max(m, 1));
  const auto& t = grid.nodes();
  const auto& w = grid.weights();
  const Eigen::Index N = Eigen::Index(t.size());
  KernelOperatorMatrix op{kind, m, x_param, Eigen::MatrixXd::Zero(N, N), 0.0};
  if (kind == KernelKind::H) {
    for (Eigen::Index i = 0; i < N; ++i) op.matrix(i, i) = t[std::size_t(i)] <= x_param + 1e-14 ? 1.0 : 0.0;
  } else {
    for (Eigen::Index i = 0; i < N; ++i) {
      const double ti = t[std::size_t(i)];
      for (Eigen::Index j = 0; j < N; ++j) {
        const double sj = t[std::size_t(j)];
        const double k = kernel_value(kind, m, x_param, ti, sj, is_volterra(kind) && i == j);
        if (k != 0.0) op.matrix(i, j) = std::sqrt(w[std::size_t(i)] * w[std::size_t(j)]) * k;
      }
    }
  }
  if (compute_norm) op.norm = largest_singular_value(op.matrix);
  return op;
}

inline KernelOperatorMatrix kernel_operator(KernelKind kind, int m, double x_param, int M, bool compute_norm = true) {
  const bool cut = kind == KernelKind::A_tilde || kind == KernelKind::H;
  const Grid g = cut && x_param > 0.0 && x_param < pi ? build_grid({std::vector<double>{x_param}}, M) : build_grid(M);
  return kernel_operator(kind, m, x_param, g, compute_norm);
}

// Norm at M and 2M; counts as settled when the relative change is below 2%.
struct RefinedNorm {
  KernelKind kind;
  int m = 0;
  double x_param = 0.0;
  int M = 0;
  double norm = 0.0;
  double norm_refined = 0.0;
  double relative_change() const { return std::abs(norm_refined - norm) / std::max(norm, 1e-300); }
  bool stable(double tol = 0.02) const { return relative_change() < tol; }
};

inline RefinedNorm refined_norm(KernelKind kind, int m, double x_param, int M) {
  RefinedNorm r{kind, m, x_param, M, 0.0, 0.0};
  r.norm = kernel_operator(kind, m, x_param, M).norm;
  r.norm_refined = kernel_operator(kind, m, x_param, 2 * M).norm;
  return r;
}

// Uniform-boundedness proxy for the Hardy-type operators E_m.
struct HardyReport {
  std::vector<int> m;
  std::vector<RefinedNorm> norms;
  double ratio = 0.0;  // max ||E_m|| / min ||E_m||
};

// Each E_m is discretised on max(min_M, 16 m) sub-intervals and again on twice that.
inline HardyReport hardy_bound_check(const std::vector<int>& m_list, int min_M = 256) {
  HardyReport r;
  r.m = m_list;
  double lo = 1e300, hi = 0.0;
  for (int m : m_list) {
    int M = std::max(min_M, 16 * std::max(m, 1));
    if (M % 2) ++M;
    r.norms.push_back(refined_norm(KernelKind::E, m, 0.0, M));
    lo = std::min(lo, r.norms.back().norm);
    hi = std::max(hi, r.norms.back().norm);
  }
  r.ratio = m_list.empty() ? 0.0 : hi / lo;
  return r;
}

// max over xi in [xi_min, pi] and m <= m_max of |D_m(xi)| |xi|.
inline double dirichlet_decay_constant(int m_max, double xi_min = 0.01, int samples = 4000) {
  double c = 0.0;
  for (int m = 0; m <= m_max; ++m)
    for (int k = 0; k <= samples; ++k) {
      const double xi = xi_min + (pi - xi_min) * k / samples;
      c = std::max(c, std::abs(dirichlet_kernel(m, xi)) * xi);
    }
  return c;
}

// max |(S_m - E_m^*) - A_m| over matrix entries, relative to max |A_m|.
inline double decomposition_residual(int m, int M) {
  const Grid g = build_grid(M);
  const auto S = kernel_operator(KernelKind::S, m, 0.0, g, false);
  const auto E = kernel_operator(KernelKind::E, m, 0.0, g, false);
  const auto A = kernel_operator(KernelKind::A, m, 0.0, g, false);
  const Eigen::MatrixXd diff = S.matrix - E.matrix.transpose() - A.matrix;
  return diff.cwiseAbs().maxCoeff() / A.matrix.cwiseAbs().maxCoeff();
}

// Shift identity T_{-x} A_{m,-x} T_x = A_m - Atilde_{m,x} on the periodic
// trapezoid discretisation t_i = i pi / M, i = 0..M-1, with x = k pi / M.
// T_x acts on the input by periodic index shift; T_{-x} evaluates the output
// at t - x, where a negative upper limit gives the signed integral over
// [t - x, 0].  Returns the max entry difference relative to max |A_m|.
inline double shift_identity_residual(int m, int M, int shift_nodes) {
  const double h = pi / M;
  const double x = shift_nodes * h;
  const Eigen::Index N = M;
  auto signed_weight = [](int lo, int hi, int j) {
    // Trapezoid weight (in units of h) of node j in the signed integral from lo to hi.
    const int a = std::min(lo, hi), b = std::max(lo, hi);
    if (j < a || j > b || a == b) return 0.0;
    const double wgt = (j == a || j == b) ? 0.5 : 1.0;
    return hi >= lo ? wgt : -wgt;
  };
  // Output at node i: (A_{m,-x} T_x u)(t_i - x) = sum_j wt(j) u((j + k) mod M) D_m(t_i - 2x - 2 s_j),
  // with s_j = j h running over [t_i - x, 0] or [0, t_i - x].
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < M; ++i) {
    const int upper = i - shift_nodes;  // index of t_i - x
    const int lo = std::min(0, upper), hi = std::max(0, upper);
    for (int j = lo; j <= hi; ++j) {
      const double wt = signed_weight(0, upper, j);
      if (wt == 0.0) continue;
      const int col = ((j + shift_nodes) % M + M) % M;
      lhs(i, col) += wt * h * dirichlet_kernel(m, i * h - 2.0 * x - 2.0 * j * h);
    }
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double wt = signed_weight(0, i, j) - signed_weight(0, shift_nodes, j);
      if (wt != 0.0) rhs(i, j) = wt * h * dirichlet_kernel(m, i * h - 2.0 * j * h);
    }
  return (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff();
}

}  // namespace equiconv
