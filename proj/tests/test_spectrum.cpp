#include <gtest/gtest.h>

#include "equiconv/spectrum.hpp"
#include "oracles.hpp"

using namespace equiconv;

TEST(LocateReal, FreeOperator) {
  const auto roots = locate(make_constant(0.0), 20);
  ASSERT_EQ(roots.size(), 20u);
  for (const auto& r : roots) {
    EXPECT_EQ(r.lambda.imag(), 0.0);
    EXPECT_LE(std::abs(r.lambda.real() - r.n * r.n), 1e-9 * r.n * r.n);
    EXPECT_TRUE(r.simple);
  }
}

TEST(LocateReal, ConstantPrimitiveIsFree) {
  const auto roots = locate(make_constant(5.0), 10);
  for (const auto& r : roots) EXPECT_LE(std::abs(r.lambda.real() - r.n * r.n), 1e-9 * r.n * r.n);
}

TEST(LocateReal, DeltaFrozenValues) {
  const double a1[] = {1.5460483528423768191, 4, 9.6208373890110564285, 16, 25.630634335902102812};
  const double a2[] = {-0.60813045160306447318, 3.2082893952321375909, 9, 14.981260650113380375,
                       24.104061733064141894};
  const auto r1 = locate(make_step(1.0, pi / 2), 5);
  const auto r2 = locate(make_step(-2.0, pi / 3), 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(r1[std::size_t(i)].lambda.real(), a1[i], 1e-9 * (1 + std::abs(a1[i])));
    EXPECT_NEAR(r2[std::size_t(i)].lambda.real(), a2[i], 1e-9 * (1 + std::abs(a2[i])));
  }
}

TEST(LocateReal, DeltaMatchesBisectionOracle) {
  const auto ref = oracle::delta_eigenvalues(2.5, 1.0, 24);
  const auto roots = locate(make_step(2.5, 1.0), 24);
  for (std::size_t i = 0; i < ref.size(); ++i)
    EXPECT_NEAR(roots[i].lambda.real(), double(ref[i]), 1e-9 * (1 + std::abs(double(ref[i]))));
}

TEST(LocateComplex, RootsAreZerosAndIncludeRealLimit) {
  const L2Function u{PiecewiseConstant{{0.0, pi / 2, pi}, {0.0, cplx(0.0, 1.0)}}, "i_chi"};
  const auto roots = locate(u, 12);
  ASSERT_EQ(roots.size(), 12u);
  const CharacteristicFunction phi(u);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    EXPECT_LE(std::abs(phi(roots[i].lambda)), 1e-9 * std::max(1.0, roots[i].dphi_abs * std::abs(roots[i].lambda)));
    if (i) EXPECT_LE(std::abs(roots[i - 1].lambda), std::abs(roots[i].lambda) + 1e-12);
  }
  EXPECT_NEAR(roots[0].lambda.real(), 1.10064, 1e-4);
  EXPECT_NEAR(roots[0].lambda.imag(), 0.625123, 1e-5);
}

TEST(LocateComplex, RealPotentialThroughComplexPathAgrees) {
  const auto u = make_step(1.0, pi / 2);
  const auto a = locate_real(u, 8), b = locate_complex(u, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_LE(std::abs(a[i].lambda - b[i].lambda), 1e-8 * (1 + std::abs(a[i].lambda)));
}

TEST(LocateReal, RejectsComplexPotential) {
  EXPECT_THROW(locate_real(make_step(cplx(0, 1), 1.0), 3), DomainError);
}

TEST(Eigenfunction, FreeModesAreNormalizedSines) {
  const Grid g = build_grid(512);
  for (int n : {1, 3, 7}) {
    const auto e = eigenfunction(make_constant(0.0), n, double(n * n), g);
    EXPECT_NEAR(g.norm(e.y), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(e.kappa - 1.0), 0.0, 1e-9);
    for (std::size_t i = 0; i < g.size(); ++i)
      EXPECT_NEAR(std::abs(e.y[i] - sine_norm * std::sin(n * g.nodes()[i])), 0.0, 1e-9);
  }
}

TEST(Eigenfunction, JumpConditionAtDelta) {
  // y is continuous at a, y' jumps by c y(a); with q = c delta_a, y^[1] is continuous.
  const double c = 1.0, a = pi / 2;
  const auto u = make_step(c, a);
  const Grid g = grid_for({&u}, 1024);
  const auto r = locate(u, 3);
  for (const auto& root : r) {
    const auto e = eigenfunction(u, root.n, root.lambda, g);
    const auto& x = g.nodes();
    const std::size_t i = std::size_t(std::find_if(x.begin(), x.end(), [&](double v) { return std::abs(v - a) < 1e-14; }) - x.begin());
    ASSERT_LT(i, x.size());
    const double h = x[i + 1] - x[i];
    const cplx left = (e.y[i] - e.y[i - 1]) / h, right = (e.y[i + 1] - e.y[i]) / h;
    // one-sided differences carry O(h lambda) error
    EXPECT_NEAR(std::abs((right - left) - c * e.y[i]), 0.0, 4 * h * std::abs(root.lambda) + 1e-6);
  }
}

TEST(Biorthogonal, RealPotentialPairing) {
  const auto u = make_step(-2.0, pi / 3);
  const Grid g = grid_for({&u}, 2048);
  const auto pairs = eigenpairs(u, locate(u, 16), g);
  const auto b = biorthogonal(pairs);
  EXPECT_LE(b.max_pairing_error, 1e-6);
  for (const auto& k : b.kappa) EXPECT_NEAR(std::abs(k - 1.0), 0.0, 1e-9);
}

TEST(Biorthogonal, ComplexPotentialPairing) {
  const L2Function u{PiecewiseConstant{{0.0, pi / 2, pi}, {0.0, cplx(0.0, 1.0)}}, "i_chi"};
  const Grid g = grid_for({&u}, 2048);
  const auto b = biorthogonal(eigenpairs(u, locate(u, 16), g));
  EXPECT_LE(b.max_pairing_error, 1e-6);
}

TEST(Biorthogonal, RejectsMixedGrids) {
  const auto u = make_constant(0.0);
  std::vector<Eigenpair> p{eigenfunction(u, 1, 1.0, build_grid(64)), eigenfunction(u, 2, 4.0, build_grid(128))};
  EXPECT_THROW(biorthogonal(p), GridMismatchError);
}

TEST(OperationalSimpleIndex, OneWhenAllSimple) {
  EXPECT_EQ(operational_simple_index(locate(make_step(1.0, 1.0), 10)), 1);
}
