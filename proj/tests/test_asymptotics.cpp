#include <gtest/gtest.h>

#include "equiconv/asymptotics.hpp"
#include "oracles.hpp"

using namespace equiconv;

namespace {

// int_0^x u(t) sin n(x - 2t) dt, composite Simpson split at the breakpoints of u.
cplx conv_oracle(const L2Function& u, int n, double x) {
  std::vector<double> br{0.0};
  for (double b : u.breakpoints())
    if (b > 0.0 && b < x) br.push_back(b);
  br.push_back(x);
  cplx s = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double a = br[k], b = br[k + 1];
    std::vector<cplx> f;
    for (int i = 0; i <= 20000; ++i) {
      const double t = a + (b - a) * i / 20000;
      // one-sided values inside the piece
      f.push_back(eval_u(u, std::clamp(t, a + 1e-13, b)) * std::sin(n * (x - 2 * t)));
    }
    s += oracle::simpson(f, a, b);
  }
  return s;
}

}  // namespace

TEST(Remainders, VanishForFreeOperator) {
  const auto u = make_constant(0.0);
  const Grid g = build_grid(1024);
  const auto pairs = eigenpairs(u, locate(u, 16), g);
  const auto b = biorthogonal(pairs, false);
  const auto r = remainders(pairs, b, g, 1, 16);
  ASSERT_EQ(r.size(), 16u);
  for (double gm : r.gamma) EXPECT_LE(gm, 1e-9);
}

TEST(Remainders, PsiEqualsPhiForRealPotential) {
  const auto u = make_step(1.0, pi / 2);
  const Grid g = grid_for({&u}, 1024);
  const auto pairs = eigenpairs(u, locate(u, 8), g);
  const auto r = remainders(pairs, biorthogonal(pairs, false), g, 1, 8);
  for (std::size_t k = 0; k < r.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(r.psi[k][i] - r.phi[k][i]), 0.0, 1e-10);
}

TEST(Remainders, RangeChecked) {
  const auto u = make_constant(0.0);
  const Grid g = build_grid(64);
  const auto pairs = eigenpairs(u, locate(u, 4), g);
  EXPECT_THROW(remainders(pairs, biorthogonal(pairs, false), g, 1, 5), Error);
}

TEST(ConvolutionTerm, MatchesQuadrature) {
  const auto step = make_step(cplx(1.0, -0.5), 1.0);
  const L2Function lin{PiecewiseLinear{{0.0, pi}, {0.0, pi}}, "t"};
  for (const auto* u : {&step, &lin}) {
    const Grid g = grid_for({u}, 2048);
    for (int n : {1, 4, 9}) {
      const auto c = convolution_term(*u, n, g);
      for (std::size_t i : {std::size_t(300), std::size_t(1100), g.size() - 1})
        EXPECT_NEAR(std::abs(c[i] - conv_oracle(*u, n, g.nodes()[i])), 0.0, 1e-7) << u->label() << n;
    }
  }
}

TEST(ConvolutionTerm, ZeroForConstantAndBeforeSupport) {
  const Grid g = build_grid(512);
  // int_0^x c sin n(x - 2t) dt = c (cos nx - cos nx) / 2n = 0
  for (const cplx& v : convolution_term(make_constant(3.0), 5, g)) EXPECT_NEAR(std::abs(v), 0.0, 1e-10);
  const auto u = make_step(2.0, 2.0);
  const Grid h = grid_for({&u}, 512);
  const auto c = convolution_term(u, 3, h);
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h.nodes()[i] <= 2.0) EXPECT_EQ(c[i], cplx(0.0));
}

TEST(Psi0Model, AddsSineAndCosine) {
  const Grid g = build_grid(256);
  const auto p = psi0_model(make_constant(0.0), 2, cplx(0.5, 1.0), -2.0, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.nodes()[i];
    EXPECT_NEAR(std::abs(p[i] - (cplx(0.5, 1.0) * std::sin(2 * x) - 2.0 * std::cos(2 * x))), 0.0, 1e-12);
  }
}

TEST(Psi1, HomogeneityOfParts) {
  const L2Function u{PiecewiseConstant{{0.0, 0.8, 2.0, pi}, {cplx(0.3, 0.2), -1.0, 0.7}}, "u"};
  const Grid g = grid_for({&u}, 1024);
  const auto a = psi1_terms(u, 3, g), b = psi1_terms(scaled(u, 2.0), 3, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(std::abs(b.linear[i] - 2.0 * a.linear[i]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(b.quadratic[i] - 4.0 * a.quadratic[i]), 0.0, 1e-12);
  }
}

TEST(Psi1, ZeroForZeroPotential) {
  const Grid g = build_grid(128);
  for (const cplx& v : psi1_model(make_constant(0.0), 2, g)) EXPECT_EQ(v, cplx(0.0));
}

TEST(Psi1, ConvergesUnderRefinement) {
  const L2Function u{PiecewiseLinear{{0.0, 1.0, pi}, {1.0, -0.5, cplx(0.0, 2.0)}}, "u"};
  const Grid g1 = grid_for({&u}, 1024), g4 = grid_for({&u}, 4096);
  for (int n : {1, 5}) {
    const auto a = psi1_model(u, n, g1), b = psi1_model(u, n, g4);
    EXPECT_NEAR(std::abs(a.back() - b.back()), 0.0, 1e-6);
  }
  EXPECT_THROW(psi1_terms(u, 0, g1), DomainError);
}

TEST(FitAndSplit, ModelCapturesFirstOrder) {
  const auto u = make_step(1.0, pi / 2);
  const Grid g = grid_for({&u}, 4096);
  const auto pairs = eigenpairs(u, locate(u, 32), g);
  const auto seq = remainders(pairs, biorthogonal(pairs, false), g, 1, 32);
  const auto fits = fit_and_split(seq, u, g);
  ASSERT_EQ(fits.size(), 32u);
  // The first-order terms are O(1/n); what is left over decays faster, so
  // n |psi_{n,2}| falls off with n.
  auto peak = [&](int lo, int hi) {
    double m = 0.0;
    for (int n = lo; n <= hi; ++n) m = std::max(m, n * fits[std::size_t(n - 1)].psi2_norm);
    return m;
  };
  EXPECT_LT(peak(24, 32), 0.75 * peak(8, 16));
}
