#include <gtest/gtest.h>

#include <cmath>

#include "nsv/analysis.hpp"
#include "nsv/error.hpp"

using namespace nsv;

namespace {
Scenario base(bool noise) {
  Scenario sc;
  sc.params.nu = 0.05;
  sc.params.kappa = 0.5;
  sc.n_modes = 24;
  sc.grid = 16;
  sc.dt = 1e-2;
  sc.T = 0.2;
  sc.ic.energy = 1.0;
  if (noise) sc.noise = {NoiseFamily::linear, 0.5, 4};
  return sc;
}
}  // namespace

TEST(EnergyAudit, RecomputesStoredLedgerExactly) {
  const Scenario sc = base(true);
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  const EnergyAudit a = energy_audit(*pb, tr);
  EXPECT_EQ(a.rows.size(), tr.ledger.size());
  EXPECT_EQ(a.recompute_gap, 0.0);
  EXPECT_LE(a.bookkeeping_gap, 1e-15);
  EXPECT_EQ(a.cumulative.size(), tr.times.size());
  EXPECT_NEAR(a.cumulative.back(), a.total_residual, 1e-15);
}

TEST(EnergyAudit, RejectsTrajectoryWithoutStates) {
  const Scenario sc = base(false);
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0, RunOptions{false, false});
  EXPECT_THROW(energy_audit(*pb, tr), ValidationError);
}

TEST(EnergyAudit, NoiseOffEnergyNonincreasing) {
  const Scenario sc = base(false);
  auto pb = make_problem(sc);
  const EnergyAudit a = energy_audit(*pb, run_path(sc, pb, 0));
  EXPECT_TRUE(a.nonincreasing);
  EXPECT_LE(a.max_energy_increase, 0.0);
}

TEST(Refinement, DissipationResidualHalves) {
  Scenario sc = base(false);
  sc.T = 0.5;
  const RefinementReport r = residual_refinement(sc);
  EXPECT_NEAR(r.ratio(), 0.5, 0.1);
  EXPECT_DOUBLE_EQ(r.dt_fine, 0.5 * r.dt_coarse);
}

TEST(Ensemble, MeanResidualWithinThreeStandardErrors) {
  Scenario sc = base(true);
  const EnsembleLedger e = ensemble_energy_audit(sc, 64, 5, 2);
  EXPECT_EQ(e.paths, 64);
  EXPECT_EQ(e.excluded, 0);
  EXPECT_EQ(e.times.size(), 4u);  // t = 0 carries no residual
  EXPECT_TRUE(e.pass) << e.worst_z;
}

TEST(Moments, RejectGammaBelowTwo) { EXPECT_THROW(moment_estimate(base(true), 4, 1.5, 1), ConfigError); }

TEST(Moments, DeterministicSupEqualsInitialEnergy) {
  const Scenario sc = base(false);
  const MomentReport r = moment_estimate(sc, 3, 2.0, 1);
  EXPECT_EQ(r.sup_energy.estimate, r.energy0);
  EXPECT_EQ(r.sup_energy.se, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(Moments, IndependentOfThreadCount) {
  const Scenario sc = base(true);
  const MomentReport a = moment_estimate(sc, 16, 2.0, 1), b = moment_estimate(sc, 16, 2.0, 4);
  EXPECT_EQ(a.sup_energy.estimate, b.sup_energy.estimate);
  EXPECT_EQ(a.gradient.se, b.gradient.se);
}

TEST(Moments, BelowExplicitBounds) {
  Scenario sc = base(true);
  sc.params.alpha = 0.1;
  const MomentReport r = moment_estimate(sc, 16, 2.0, 2);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.sup_energy.bound.has_value());
  EXPECT_LT(r.sup_energy.estimate, *r.sup_energy.bound);
  EXPECT_TRUE(r.dissipation.within_bound());
  EXPECT_TRUE(r.stabilizer.within_bound());
}

TEST(WeakForm, SchemeTrajectorySatisfiesTestedIdentity) {
  Scenario sc = base(true);
  sc.params.p = 1.5;
  sc.params.q = 6.0;
  sc.params.alpha = 0.1;
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  const WeakFormReport w = weak_form_residual(*pb, tr);
  EXPECT_LE(w.max_residual, 1e-9 * w.scale);
  Trajectory bad = tr;
  bad.states[10][3] += 1e-3;
  EXPECT_GE(weak_form_residual(*pb, bad).max_residual, 1e4 * w.max_residual);
}

TEST(WeakForm, RejectsCompressibleTestField) {
  const Scenario sc = base(false);
  auto pb = make_problem(sc);
  const Trajectory tr = run_path(sc, pb, 0);
  SpectralField phi(sc.grid, pb->basis.k_max());
  phi.at(0, 1, 0) = 0.5;
  phi.at(0, -1, 0) = 0.5;
  EXPECT_THROW(weak_form_residual(*pb, tr, {phi}), ValidationError);
}

TEST(AlphaSweep, MonotoneInAlpha) {
  Scenario sc = base(true);
  sc.params.q = 4.0;
  const AlphaSweepReport r = alpha_sweep(sc, {0.25, 0.125, 0.0625});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.stabilizer_decreasing);
  EXPECT_TRUE(r.distance_decreasing);
  EXPECT_THROW(alpha_sweep(sc, {0.1, 0.2}), ConfigError);
  EXPECT_THROW(alpha_sweep(sc, {0.0}), ConfigError);
}

TEST(Twin, LadyzhenskayaConstantIsModerate) {
  const double c = calibrate_ladyzhenskaya(50, 1);
  EXPECT_GT(c, 0.1);
  EXPECT_LT(c, 0.5);
}

TEST(Twin, IdenticalDataStayIdentical) {
  const Scenario sc = base(true);
  auto pb = make_problem(sc);
  const auto u0 = initial_coefficients(sc.ic, pb->basis, sc.params.kappa);
  const TwinReport r = twin_uniqueness(sc, u0, u0, 4, 0.2, 2);
  EXPECT_TRUE(r.all_identical);
  for (const auto& s : r.series)
    for (double g : s.gap_energy) EXPECT_EQ(g, 0.0);
}

TEST(Twin, PerturbedGapObeysWeightedBound) {
  const Scenario sc = base(true);
  auto pb = make_problem(sc);
  const auto u0 = initial_coefficients(sc.ic, pb->basis, sc.params.kappa);
  auto u1 = u0;
  u1[4] += 1e-3;
  const TwinReport r = twin_uniqueness(sc, u0, u1, 8, 0.2, 2);
  EXPECT_FALSE(r.all_identical);
  EXPECT_EQ(r.excluded, 0);
  EXPECT_LE(r.mean_ratio, r.C);
  EXPECT_TRUE(std::isfinite(r.C));
  // At t = 0 the ratio is 1/|k|^2 + kappa for a single-mode perturbation.
  EXPECT_GE(r.C, 1.0 / pb->basis.wavenumber2(4) + sc.params.kappa - 1e-12);
  EXPECT_THROW(twin_uniqueness(sc, u0, {1.0}, 2, 0.2, 1), ValidationError);
}

TEST(MonotoneLimit, GapNonnegativeForAllRegimes) {
  for (double p : {1.5, 2.0, 3.0}) {
    Scenario sc = base(true);
    sc.params.p = p;
    const MonotoneGapReport g = monotone_limit_gap(sc, 12, 24);
    EXPECT_TRUE(g.pass) << p;
    EXPECT_GE(g.integral, -1e-8 * g.scale);
  }
}
