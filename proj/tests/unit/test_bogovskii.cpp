#include <gtest/gtest.h>

#include <cmath>

#include "nsv/analysis.hpp"
#include "nsv/bogovskii.hpp"
#include "nsv/error.hpp"

using namespace nsv;

namespace {
double reference(double x, double y) {
  return std::sin(kPi * x) * std::sin(kPi * y) - 4.0 / (kPi * kPi);
}
}  // namespace

TEST(Bogovskii, BumpHasUnitMass) {
  double m, l1;
  square_moments(bogovskii_bump, m, l1);
  EXPECT_NEAR(m, 1.0, 1e-6);
}

TEST(Bogovskii, ZeroDatumGivesZero) {
  const SquareField w = bogovskii_solve({[](double, double) { return 0.0; }, 8});
  for (double v : w.x) EXPECT_EQ(v, 0.0);
  for (double v : w.y) EXPECT_EQ(v, 0.0);
}

TEST(Bogovskii, RejectsNonzeroMean) {
  EXPECT_THROW(bogovskii_solve({[](double, double) { return 1.0; }, 8}), ValidationError);
  EXPECT_THROW(bogovskii_solve({reference, 1}), ValidationError);
}

TEST(Bogovskii, VanishesOnBoundaryAndConverges) {
  double prev = 1e300;
  for (int m : {8, 16, 32}) {
    const SquareField w = bogovskii_solve({reference, m});
    const BogovskiiDiagnostics d = bogovskii_diagnostics(w, reference);
    EXPECT_LT(d.boundary_max, 1e-12);
    EXPECT_LT(d.divergence_residual, prev);
    prev = d.divergence_residual;
    EXPECT_GT(d.grad_l2, 0.0);
  }
}

TEST(Bogovskii, BatchMatchesSingleSolves) {
  auto f = [](double x, double y) { return std::cos(kPi * x) * std::cos(2 * kPi * y); };
  const auto batch = bogovskii_solve_batch({reference, f}, 8);
  const SquareField single = bogovskii_solve({f, 8});
  EXPECT_EQ(batch[1].x, single.x);
  EXPECT_EQ(batch[1].y, single.y);
}

TEST(Bogovskii, StudyOnSmallResolutions) {
  const BogovskiiStudy st = bogovskii_study({8, 16, 32}, 4, 3);
  ASSERT_EQ(st.rows.size(), 3u);
  EXPECT_EQ(st.rows[0].residual.size(), 5u);
  EXPECT_TRUE(st.residual_decreasing);
  EXPECT_TRUE(st.ratio_bounded);
  EXPECT_GT(st.constant, 0.0);
}
