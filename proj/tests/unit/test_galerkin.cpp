#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "nsv/analysis.hpp"
#include "nsv/error.hpp"
#include "nsv/galerkin.hpp"

using namespace nsv;

namespace {

std::vector<double> unit(std::size_t n, std::size_t j) {
  std::vector<double> c(n, 0.0);
  c[j] = 1.0;
  return c;
}

Scenario small(double nu, double alpha, bool noise) {
  Scenario sc;
  sc.params.nu = nu;
  sc.params.alpha = alpha;
  sc.params.q = 4.0;
  sc.n_modes = 24;
  sc.grid = 16;
  sc.dt = 1e-2;
  sc.T = 0.2;
  sc.ic.energy = 1.0;
  if (noise) sc.noise = {NoiseFamily::linear, 0.5, 4};
  return sc;
}

}  // namespace

TEST(Basis, OrthonormalAndSolenoidal) {
  const GalerkinBasis b(30, 16);
  ASSERT_EQ(b.size(), 30u);
  EXPECT_EQ(b[0].kind, BasisKind::mean_x);
  EXPECT_EQ(b[1].kind, BasisKind::mean_y);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const SpectralField ui = b.reconstruct(unit(b.size(), i));
    EXPECT_TRUE(ui.divergence_free(1e-15));
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double g = inner(ui, b.reconstruct(unit(b.size(), j)));
      EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-14) << i << "," << j;
    }
  }
}

TEST(Basis, OrderedByWavenumber) {
  const GalerkinBasis b(40, 32, true);
  EXPECT_EQ(b[0].kind, BasisKind::cosine);
  for (std::size_t j = 1; j < b.size(); ++j) EXPECT_LE(b.wavenumber2(j - 1), b.wavenumber2(j));
}

TEST(Basis, ProjectInvertsReconstruct) {
  const GalerkinBasis b(20, 16);
  std::vector<double> c(b.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = std::sin(1.0 + j);
  const auto back = b.project(b.reconstruct(c));
  for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(back[j], c[j], 1e-14);
}

TEST(Basis, RejectsAliasingGrid) {
  EXPECT_THROW(GalerkinBasis(200, 16), ConfigError);
  EXPECT_THROW(GalerkinBasis(10, 12), ConfigError);
  EXPECT_THROW(GalerkinBasis(0, 16), ConfigError);
}

TEST(Mass, EnergyIsL2PlusKappaGradient) {
  const GalerkinBasis b(20, 16);
  const MassOperator m(b, 0.5);
  std::vector<double> c(b.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = 0.1 * (j + 1);
  const NormReport r = norms(b.reconstruct(c), 2.0, 2.0);
  EXPECT_NEAR(m.energy(c), r.l2 * r.l2 + 0.5 * r.grad_l2 * r.grad_l2, 1e-12);
  const auto x = m.solve(m.apply(c));
  for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(x[j], c[j], 1e-14);
}

TEST(Stepper, ZeroStateStaysZero) {
  Scenario sc = small(0.05, 0.1, true);
  sc.ic.kind = InitialKind::zero;
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  for (double v : tr.final_state) EXPECT_EQ(v, 0.0);
}

TEST(Stepper, SingleModeLinearDecayMatchesEulerFactor) {
  Scenario sc = small(0.1, 0.0, false);
  sc.params.kappa = 0.5;
  auto pb = make_problem(sc);
  const std::size_t j = 5;
  GalerkinState s = initial_state(sc, pb);
  s.c.assign(pb->basis.size(), 0.0);
  s.c[j] = 1.0;
  const double k2 = pb->basis.wavenumber2(j);
  const StepOutcome out = advance(s);
  EXPECT_NEAR(out.next.c[j], 1.0 - sc.dt * sc.params.nu * k2 / (2.0 * (1.0 + sc.params.kappa * k2)), 1e-14);
}

TEST(Stepper, ShearIsSteadyForEulerVoigt) {
  Scenario sc = small(0.0, 0.0, false);
  sc.ic.kind = InitialKind::shear;
  sc.ic.energy = -1.0;
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  EXPECT_EQ(tr.final_state, tr.states.front());
}

TEST(Stepper, LedgerResidualIsSecondOrderPerStep) {
  Scenario sc = small(0.05, 0.0, false);
  auto pb = make_problem(sc);
  const auto a = energy_audit(*pb, run_path(sc, pb, 0));
  sc.dt /= 2.0;
  auto pb2 = make_problem(sc);
  const auto b = energy_audit(*pb2, run_path(sc, pb2, 0));
  EXPECT_NEAR(b.max_abs_residual / a.max_abs_residual, 0.25, 0.05);
}

TEST(Stepper, BitwiseDeterministic) {
  const Scenario sc = small(0.05, 0.1, true);
  auto pb = make_problem(sc);
  EXPECT_EQ(run_path(sc, pb, 3).final_state, run_path(sc, pb, 3).final_state);
  EXPECT_NE(run_path(sc, pb, 3).final_state, run_path(sc, pb, 4).final_state);
}

TEST(Stepper, SuppliedIncrementOverridesStream) {
  const Scenario sc = small(0.05, 0.0, true);
  auto pb = make_problem(sc);
  const GalerkinState s = initial_state(sc, pb);
  WienerIncrement w = s.rng.increment(0, sc.dt, sc.noise.modes);
  const auto a = advance(s, &w).next.c;
  EXPECT_EQ(a, advance(s).next.c);
  for (auto& v : w.dB) v *= 2.0;
  EXPECT_NE(a, advance(s, &w).next.c);
}

TEST(Drift, ConvectionConservesEnergy) {
  Scenario sc = small(0.0, 0.0, false);
  auto pb = make_problem(sc);
  const GalerkinState s = initial_state(sc, pb);
  const auto ev = evaluate_drift(pb->basis, s.field(), pb->forcing_at(0), sc.params, sc.noise, true);
  double dot = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < ev.b.size(); ++j) {
    dot += ev.b[j] * s.c[j];
    scale += std::abs(ev.b[j] * s.c[j]);
  }
  EXPECT_NEAR(dot, 0.0, 1e-13 * std::max(1.0, scale));
}

TEST(Drift, AssembleRejectsCompressibleField) {
  const GalerkinBasis b(10, 16);
  SpectralField u(16, b.k_max());
  u.at(0, 1, 0) = 1.0;
  u.at(0, -1, 0) = 1.0;
  EXPECT_THROW(assemble_drift(b, u, SpectralField(16, b.k_max()), RheologyParams{}), ValidationError);
}

TEST(StepCount, RequiresIntegerMultiple) {
  EXPECT_EQ(step_count(1.0, 0.01), 100);
  EXPECT_THROW(step_count(1.0, 0.3), ConfigError);
  EXPECT_THROW(step_count(1.0, 0.0), ConfigError);
}

TEST(Monitor, TripsOnceAtThreshold) {
  StoppingMonitor m(2.0);
  EXPECT_FALSE(m.check(0.0, 1.0));
  EXPECT_TRUE(m.check(0.5, 2.5));
  EXPECT_TRUE(m.check(0.6, 0.1));
  EXPECT_DOUBLE_EQ(*m.tripped_at(), 0.5);
}

TEST(Monitor, RunRecordsTripTime) {
  Scenario sc = small(0.05, 0.0, false);
  sc.stop_threshold = 1e-6;
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  ASSERT_TRUE(tr.tripped_at.has_value());
  EXPECT_EQ(*tr.tripped_at, 0.0);
}

TEST(InitialData, EnergyRescaleAndPresets) {
  const GalerkinBasis b(40, 32);
  const MassOperator m(b, 0.5);
  InitialCondition ic;
  ic.energy = 2.0;
  EXPECT_NEAR(m.energy(initial_coefficients(ic, b, 0.5)), 2.0, 1e-12);
  ic.kind = InitialKind::zero;
  for (double v : initial_coefficients(ic, b, 0.5)) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(parse_initial_kind("taylor-green"), InitialKind::taylor_green);
  EXPECT_THROW(parse_initial_kind("vortex"), ConfigError);
}

TEST(Forcing, SequenceHoldsLastField) {
  SpectralField a(16, 2), c(16, 2);
  a.at(0, 0, 1) = 1.0;
  c.at(0, 0, 1) = 2.0;
  const Forcing f = Forcing::sequence({a, c});
  EXPECT_EQ(f.at(0)->at(0, 0, 1), Complex(1.0));
  EXPECT_EQ(f.at(7)->at(0, 0, 1), Complex(2.0));
  EXPECT_EQ(Forcing::zero().at(0), nullptr);
}
