#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "nsv/error.hpp"
#include "nsv/rheology.hpp"

using namespace nsv;

namespace {
RheologyParams params(double p, double q, double alpha) {
  RheologyParams r;
  r.p = p;
  r.q = q;
  r.alpha = alpha;
  return r;
}
}  // namespace

TEST(RheologyParams, QConstraintInactiveWithoutStabilizer) { EXPECT_NO_THROW(params(2.0, 3.0, 0.0).validate()); }

TEST(RheologyParams, RejectsPBelowOne) {
  try {
    params(0.9, 4.0, 0.0).validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("power-law index"), std::string::npos);
  }
}

TEST(RheologyParams, StabilizerNeedsQAtLeastTwicePConjugate) {
  try {
    params(1.5, 5.0, 0.1).validate();
    FAIL();
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("q=5"), std::string::npos);
    EXPECT_NE(m.find("= 6"), std::string::npos);
  }
  EXPECT_NO_THROW(params(1.5, 6.0, 0.1).validate());
  EXPECT_DOUBLE_EQ(params(3.0, 4.0, 0.1).q_min(), 3.0);
}

TEST(RheologyParams, RejectsNonPositiveKappa) {
  RheologyParams r;
  r.kappa = 0.0;
  EXPECT_THROW(r.validate(), ConfigError);
}

TEST(PowerLaw, NewtonianIsIdentity) {
  SymTensorField D(4);
  for (std::size_t i = 0; i < D.xx.size(); ++i) {
    D.xx[i] = 0.1 * i;
    D.xy[i] = D.yx[i] = -0.2 * i;
    D.yy[i] = -0.1 * i;
  }
  const SymTensorField A = power_law_stress(D, params(2.0, 4.0, 0.0));
  EXPECT_EQ(A.xx, D.xx);
  EXPECT_EQ(A.xy, D.xy);
}

TEST(PowerLaw, ZeroAtZeroForShearThinning) {
  double axx, axy, ayy;
  power_law_point(0.0, 0.0, 0.0, 1.2, axx, axy, ayy);
  EXPECT_EQ(axx, 0.0);
  EXPECT_EQ(axy, 0.0);
  EXPECT_EQ(ayy, 0.0);
}

TEST(PowerLaw, Homogeneity) {
  double a[3], b[3];
  for (double p : {1.2, 1.5, 3.0, 4.0}) {
    power_law_point(0.3, -0.7, 1.1, p, a[0], a[1], a[2]);
    power_law_point(2.0 * 0.3, 2.0 * -0.7, 2.0 * 1.1, p, b[0], b[1], b[2]);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(b[i], std::pow(2.0, p - 1.0) * a[i], 1e-13);
  }
}

TEST(PowerLaw, RejectsNonSymmetricInput) {
  SymTensorField D(2);
  D.xy[0] = 1.0;
  EXPECT_THROW(power_law_stress(D, RheologyParams{}), ValidationError);
}

TEST(Stabilizer, MatchesPointwiseFormula) {
  GridVector u(2);
  u.x = {3.0, 0.0, 1.0, 0.0};
  u.y = {4.0, 0.0, 0.0, -2.0};
  const GridVector a = stabilizer(u, params(2.0, 3.0, 0.5));
  EXPECT_NEAR(a.x[0], 0.5 * 5.0 * 3.0, 1e-14);
  EXPECT_NEAR(a.y[0], 0.5 * 5.0 * 4.0, 1e-14);
  EXPECT_EQ(a.x[1], 0.0);
  EXPECT_NEAR(a.y[3], 0.5 * 2.0 * -2.0, 1e-14);
}

TEST(Monotonicity, EqualArgumentsGiveZero) {
  const Mat2 M{1.0, 0.5, 0.5, -2.0};
  for (double p : {1.2, 2.0, 4.0}) {
    const auto r = monotonicity_gap(M, M, p);
    EXPECT_EQ(r.product, 0.0);
    EXPECT_TRUE(r.holds);
  }
}

TEST(Monotonicity, NewtonianProductIsSquaredDistance) {
  const Mat2 M{1.0, 0.5, 0.5, -2.0}, N{0.0, -1.0, -1.0, 1.0};
  const auto r = monotonicity_gap(M, N, 2.0);
  EXPECT_NEAR(r.product, 1.0 + 2.0 * 2.25 + 9.0, 1e-14);
  EXPECT_NEAR(r.lhs, 0.5 * r.product, 1e-14);
  EXPECT_TRUE(r.holds);
}

TEST(Monotonicity, RandomPairsSatisfyAllForms) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double p : {1.2, 1.5, 2.0, 3.0, 4.0})
    for (int i = 0; i < 2000; ++i) {
      const double b = u(rng), c = u(rng);
      const Mat2 M{u(rng), b, b, u(rng)}, N{u(rng), c, c, u(rng)};
      const auto r = monotonicity_gap(M, N, p);
      EXPECT_TRUE(r.holds) << "p=" << p;
      EXPECT_GE(r.product, 0.0);
    }
}

TEST(Monotonicity, RejectsNonSymmetric) {
  EXPECT_THROW(monotonicity_gap({1, 2, 3, 4}, {0, 0, 0, 0}, 2.0), ValidationError);
}
