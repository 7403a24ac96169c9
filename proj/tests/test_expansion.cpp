#include <gtest/gtest.h>

#include "equiconv/expansion.hpp"
#include "oracles.hpp"

using namespace equiconv;

namespace {

struct System {
  Grid grid;
  std::vector<Eigenpair> pairs;
  BiorthSystem biorth;
};

System system_for(const L2Function& u, const std::vector<const L2Function*>& targets, int n, int M) {
  std::vector<std::vector<double>> sets{u.breakpoints()};
  for (auto* t : targets) sets.push_back(t->breakpoints());
  System s;
  s.grid = build_grid(std::span<const std::vector<double>>(sets), M);
  s.pairs = eigenpairs(u, locate(u, n), s.grid);
  s.biorth = biorthogonal(s.pairs, false);
  return s;
}

}  // namespace

TEST(SineCoeffs, IndicatorClosedForm) {
  const auto f = make_indicator(pi / 2);
  const auto c0 = sine_coeffs(f, build_grid(256), 16);
  for (int n = 1; n <= 16; ++n)
    EXPECT_NEAR(std::abs(c0[std::size_t(n - 1)] - sine_norm * (1 - std::cos(n * pi / 2)) / n), 0.0, 1e-14);
}

TEST(SineCoeffs, SinglePureSine) {
  const auto c0 = sine_coeffs(make_sine_series({0.0, 0.0, 1.0}), build_grid(256), 8);
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(std::abs(c0[std::size_t(n - 1)] - (n == 3 ? sine_norm * pi / 2 : 0.0)), 0.0, 1e-14);
}

TEST(SineCoeffs, MatchQuadratureForLinear) {
  const L2Function f{PiecewiseLinear{{0.0, pi}, {pi, -pi}}, "saw"};
  const auto c0 = sine_coeffs(f, build_grid(256), 10);
  for (int n = 1; n <= 10; ++n) {
    std::vector<double> s;
    for (int i = 0; i <= 20000; ++i) {
      const double x = pi * i / 20000;
      s.push_back((pi - 2 * x) * std::sin(n * x));
    }
    EXPECT_NEAR(c0[std::size_t(n - 1)].real(), sine_norm * oracle::simpson(s, 0.0, pi), 1e-9);
  }
}

TEST(SineCoeffs, RefusesUnderResolvedGrid) {
  EXPECT_THROW(sine_coeffs(make_indicator(1.0), build_grid(64), 16), ResolutionError);
}

TEST(SlCoeffs, FreeOperatorReproducesSineCoefficients) {
  const auto u = make_constant(0.0);
  const auto f = make_indicator(1.0);
  const auto s = system_for(u, {&f}, 32, 1024);
  const auto e = expand(f, s.biorth, s.grid);
  for (int n = 0; n < 32; ++n) EXPECT_NEAR(std::abs(e.c[std::size_t(n)] - e.c0[std::size_t(n)]), 0.0, 1e-9);
  const auto d = equiconv_diff(f, s.pairs, s.biorth, 32, s.grid);
  EXPECT_LE(d.supnorm, 1e-9);
}

TEST(SlCoeffs, EigenfunctionHasUnitCoefficient) {
  const auto u = make_step(1.0, pi / 2);
  const auto s = system_for(u, {}, 8, 4096);
  // f = y_5 sampled as a piecewise-linear interpolant on the grid nodes.
  const L2Function f{PiecewiseLinear{s.grid.nodes(), s.pairs[4].y}, "y5"};
  const auto c = sl_coeffs(f, s.biorth, s.grid);
  for (int n = 0; n < 8; ++n) EXPECT_NEAR(std::abs(c[std::size_t(n)] - (n == 4 ? 1.0 : 0.0)), 0.0, 1e-5) << n;
}

TEST(SlCoeffs, ClosedFormAgreesWithSimpson) {
  const auto u = make_step(-2.0, pi / 3);
  const L2Function f{PiecewiseLinear{{0.0, pi}, {pi, -pi}}, "saw"};
  const auto s = system_for(u, {&f}, 12, 4096);
  const auto c = sl_coeffs(f, s.biorth, s.grid);
  const Sampled fs = sample(f, s.grid);
  for (std::size_t n = 0; n < 12; ++n) EXPECT_NEAR(std::abs(c[n] - s.grid.inner(fs, s.biorth.w[n])), 0.0, 1e-9);
}

TEST(SlCoeffs, GridMismatch) {
  const auto u = make_constant(0.0);
  const auto s = system_for(u, {}, 4, 64);
  EXPECT_THROW(sl_coeffs(make_indicator(1.0), s.biorth, build_grid(128)), GridMismatchError);
}

TEST(Equiconv, DifferenceDecaysForDelta) {
  const auto u = make_step(1.0, pi / 2);
  const auto f = make_indicator(pi / 2);
  const auto s = system_for(u, {&f}, 64, 4096);
  const auto r = equiconv_report(f, s.pairs, s.biorth, {8, 16, 32, 64}, s.grid);
  EXPECT_LT(r.supnorm.back(), r.supnorm.front());
  EXPECT_LT(r.supnorm.back(), 0.1);
}

TEST(Equiconv, ExceedingAvailablePairsThrows) {
  const auto s = system_for(make_constant(0.0), {}, 4, 64);
  EXPECT_THROW(equiconv_diff(make_indicator(1.0), s.pairs, s.biorth, 5, s.grid), Error);
}

TEST(Equiconv, MZeroIsZero) {
  const auto s = system_for(make_step(1.0, 1.0), {}, 4, 64);
  EXPECT_EQ(equiconv_diff(make_indicator(1.0), s.pairs, s.biorth, 0, s.grid).supnorm, 0.0);
}

TEST(Tail, StartAndParseval) {
  EXPECT_EQ(tail_start(1), 1);
  EXPECT_EQ(tail_start(16), 4);
  EXPECT_EQ(tail_start(17), 5);
  const auto f = make_indicator(pi / 2);
  const auto t = sine_tail(f);
  EXPECT_NEAR(t(1), pi / 2, 1e-14);
  double head = 0.0;
  for (int n = 1; n < 6; ++n) head += std::norm(sine_norm * (1 - std::cos(n * pi / 2)) / n);
  EXPECT_NEAR(t(6), pi / 2 - head, 1e-13);
  const auto p = sine_tail(make_sine_series({1.0, 0.5}));
  EXPECT_NEAR(p(2), std::norm(sine_norm * 0.5 * pi / 2), 1e-14);
  EXPECT_EQ(p(3), 0.0);
}
