#include <gtest/gtest.h>

#include <cmath>

#include "nsv/error.hpp"
#include "nsv/noise.hpp"

using namespace nsv;

TEST(Noise, WeightsDecayAsInverseSquare) {
  const NoiseModel m{NoiseFamily::linear, 0.5, 4};
  EXPECT_DOUBLE_EQ(m.weight(1), 0.5);
  EXPECT_DOUBLE_EQ(m.weight(2), 0.125);
  EXPECT_NEAR(m.weight_square_sum(), 0.25 * (1 + 1.0 / 16 + 1.0 / 81 + 1.0 / 256), 1e-15);
}

TEST(Noise, OffFamilyIsInactive) {
  const NoiseModel m{NoiseFamily::off, 1.0, 4};
  EXPECT_FALSE(m.active());
  EXPECT_EQ(m.weight(1), 0.0);
}

TEST(Noise, SaturatingShapeIsBounded) {
  const NoiseModel m{NoiseFamily::saturating, 1.0, 1};
  double hx, hy;
  m.shape(1e6, 0.0, hx, hy);
  EXPECT_LT(hx, 1.0);
  m.shape(0.0, 0.0, hx, hy);
  EXPECT_EQ(hx, 0.0);
}

TEST(Noise, PhiApplyChecksModeRange) {
  const NoiseModel m{NoiseFamily::linear, 1.0, 2};
  GridVector u(2);
  EXPECT_THROW(phi_apply(u, m, 3), ValidationError);
  EXPECT_THROW(phi_apply(u, m, 0), ValidationError);
}

TEST(Noise, ConditionsHoldForBothFamilies) {
  for (auto fam : {NoiseFamily::linear, NoiseFamily::saturating}) {
    const auto r = verify_noise_conditions({fam, 0.5, 8}, 2000, 3);
    EXPECT_TRUE(r.pass) << to_string(fam);
    EXPECT_LE(r.K_emp, r.K);
    EXPECT_LE(r.L_emp, r.L);
    EXPECT_LE(r.C_emp, r.C);
  }
}

TEST(Noise, ParseFamily) {
  EXPECT_EQ(parse_noise_family("linear"), NoiseFamily::linear);
  EXPECT_EQ(parse_noise_family("saturating"), NoiseFamily::saturating);
  EXPECT_THROW(parse_noise_family("cubic"), ConfigError);
}

TEST(Noise, ValidateRejectsNegatives) {
  EXPECT_THROW((NoiseModel{NoiseFamily::linear, -1.0, 2}).validate(), ConfigError);
  EXPECT_THROW((NoiseModel{NoiseFamily::linear, 1.0, -2}).validate(), ConfigError);
}

TEST(Increments, DeterministicPerStepAndPath) {
  const RngStream a{5, 0}, b{5, 1};
  EXPECT_EQ(a.increment(3, 1e-3, 4).dB, a.increment(3, 1e-3, 4).dB);
  EXPECT_NE(a.increment(3, 1e-3, 4).dB, b.increment(3, 1e-3, 4).dB);
  EXPECT_NE(a.increment(3, 1e-3, 4).dB, a.increment(4, 1e-3, 4).dB);
  // Query order does not matter.
  const auto late = a.increment(100, 1e-3, 2);
  (void)a.increment(0, 1e-3, 2);
  EXPECT_EQ(late.dB, a.increment(100, 1e-3, 2).dB);
}

TEST(Increments, VarianceScalesWithDt) {
  const RngStream s{17, 0};
  const int n = 40000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = s.increment(k, 0.01, 1).dB[0];
    acc += v * v;
  }
  EXPECT_NEAR(acc / n, 0.01, 5.0 * 0.01 * std::sqrt(2.0 / n));
}

TEST(Increments, RejectsNonPositiveDt) { EXPECT_THROW(sample_increment({1, 0}, 0, 0.0, 1), ValidationError); }
