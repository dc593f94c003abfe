#include <gtest/gtest.h>

#include <cmath>

#include "nsv/analysis.hpp"
#include "nsv/pressure.hpp"

using namespace nsv;

namespace {
Scenario stochastic() {
  Scenario sc;
  sc.params.p = 1.5;
  sc.params.q = 6.0;
  sc.params.alpha = 0.1;
  sc.n_modes = 24;
  sc.grid = 16;
  sc.dt = 1e-2;
  sc.T = 0.1;
  sc.ic.energy = 1.0;
  sc.noise = {NoiseFamily::linear, 0.5, 4};
  return sc;
}
}  // namespace

TEST(Pressure, TaylorGreenClosedForm) {
  const int n = 32;
  const GalerkinBasis b(16, n);
  InitialCondition ic;
  ic.kind = InitialKind::taylor_green;
  RheologyParams prm;
  prm.nu = 0.0;
  const SpectralField u = b.reconstruct(initial_coefficients(ic, b, 0.5));
  const GridScalar pi = recover_pressure(split_tensor(u, prm, nullptr).H2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = 2 * kPi * i / n, y = 2 * kPi * j / n;
      EXPECT_NEAR(pi(i, j), -0.25 * (std::cos(2 * x) + std::cos(2 * y)), 1e-10);
    }
}

TEST(Pressure, ConstantTensorGivesZero) {
  SymTensorField H(8);
  for (auto* v : {&H.xx, &H.xy, &H.yx, &H.yy})
    for (auto& x : *v) x = 1.5;
  const GridScalar pi = recover_pressure(H);
  for (double v : pi.v) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Pressure, IsotropicTensorRecoversItsTrace) {
  // H = g I  gives  pi = g - mean(g).
  const int n = 16;
  SymTensorField H(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double g = std::sin(2 * kPi * i / n) * std::cos(4 * kPi * j / n);
      H.xx[static_cast<std::size_t>(i) * n + j] = H.yy[static_cast<std::size_t>(i) * n + j] = g;
    }
  const GridScalar pi = recover_pressure(H);
  for (std::size_t k = 0; k < pi.v.size(); ++k) EXPECT_NEAR(pi.v[k], H.xx[k], 1e-14);
}

TEST(Pressure, NormHelpers) {
  GridScalar g(4);
  for (auto& v : g.v) v = 2.0;
  EXPECT_DOUBLE_EQ(mean(g), 2.0);
  EXPECT_NEAR(l2_norm(g), 2.0 * 2.0 * kPi, 1e-13);
  EXPECT_NEAR(lp_norm(g, 3.0), 2.0 * std::pow(4 * kPi * kPi, 1.0 / 3.0), 1e-13);
}

TEST(Decomposition, RecombinesAndHarmonicPartVanishes) {
  const Scenario sc = stochastic();
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  const PressureParts parts = decompose_pressure(*pb, tr);
  ASSERT_EQ(parts.times.size(), tr.times.size());
  EXPECT_DOUBLE_EQ(parts.p_conjugate, 3.0);
  EXPECT_DOUBLE_EQ(parts.q0, std::min(3.0, 6.0 / 5.0));
  for (std::size_t s = 0; s < parts.times.size(); ++s) {
    EXPECT_LT(parts.residual[s], 1e-8);
    EXPECT_LT(parts.weak_residual[s], 1e-7);
    for (double v : parts.pi_h[s].v) EXPECT_EQ(v, 0.0);
  }
}

TEST(Decomposition, StochasticPartIsLinearInIncrements) {
  const Scenario sc = stochastic();
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  PressureOptions two;
  two.increment_scale = 2.0;
  const PressureParts a = decompose_pressure(*pb, tr), b = decompose_pressure(*pb, tr, two);
  for (std::size_t s = 0; s < a.pi_phi.size(); ++s)
    for (std::size_t i = 0; i < a.pi_phi[s].v.size(); ++i) EXPECT_EQ(b.pi_phi[s].v[i], 2.0 * a.pi_phi[s].v[i]);
}

TEST(Decomposition, SliceEveryThins) {
  const Scenario sc = stochastic();
  auto pb = make_problem(sc);
  PressureOptions opt;
  opt.slice_every = 5;
  const PressureParts parts = decompose_pressure(*pb, run_path(sc, pb, 0), opt);
  EXPECT_EQ(parts.times.size(), 3u);
}

TEST(Stability, RatioFiniteAndPositive) {
  const Scenario sc = stochastic();
  auto pb = make_problem(sc);
  const PressureStability s = pressure_stability(*pb, run_path(sc, pb, 0));
  EXPECT_DOUBLE_EQ(s.r, 2.0);
  EXPECT_GT(s.ratio(), 0.0);
  EXPECT_TRUE(std::isfinite(s.ratio()));
}
