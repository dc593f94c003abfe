#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "nsv/error.hpp"
#include "nsv/fields.hpp"
#include "nsv/snapshot.hpp"

using namespace nsv;

TEST(CanonicalModes, SortedByNormThenComponents) {
  const auto ks = canonical_modes(3);
  ASSERT_EQ(ks.size(), 49u);
  EXPECT_EQ(ks.front(), (Wavevector{0, 0}));
  for (std::size_t i = 1; i < ks.size(); ++i) {
    const auto& a = ks[i - 1];
    const auto& b = ks[i];
    const bool ordered = a.norm2() < b.norm2() || (a.norm2() == b.norm2() && (a.kx < b.kx || (a.kx == b.kx && a.ky < b.ky)));
    EXPECT_TRUE(ordered) << i;
  }
}

TEST(Grid, RejectsNonPowerOfTwoAndUnderresolved) {
  EXPECT_THROW(validate_grid(48, 4), ConfigError);
  EXPECT_THROW(validate_grid(8, 4), ConfigError);
  EXPECT_NO_THROW(validate_grid(16, 4));
}

TEST(Fft, ForwardInverseRoundTrip) {
  GridScalar g(16);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (auto& v : g.v) v = nd(rng);
  const GridScalar back = inverse(forward(g));
  for (std::size_t i = 0; i < g.v.size(); ++i) EXPECT_NEAR(back.v[i], g.v[i], 1e-13);
}

TEST(Fft, SingleModeCoefficient) {
  const int n = 16;
  GridScalar g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = std::cos(2.0 * kPi * (2 * i + 3 * j) / n);
  const Spectrum s = forward(g);
  EXPECT_NEAR(s(2, 3).real(), 0.5, 1e-14);
  EXPECT_NEAR(s(-2, -3).real(), 0.5, 1e-14);
  EXPECT_NEAR(std::abs(s(1, 1)), 0.0, 1e-14);
}

TEST(Fft, DealiasZeroesTopThird) {
  Spectrum s(12);
  for (auto& c : s.data()) c = 1.0;
  dealias(s);
  EXPECT_EQ(s(5, 0), Complex(0.0));
  EXPECT_EQ(s(4, 4), Complex(1.0));
  EXPECT_EQ(s(-5, 1), Complex(0.0));
}

TEST(SpectralField, RandomSolenoidalIsDivergenceFreeAndRealMeanFree) {
  std::mt19937_64 rng(11);
  const SpectralField u = random_solenoidal(32, 8, 1.0, rng);
  EXPECT_TRUE(u.divergence_free(1e-13));
  EXPECT_EQ(u.at(0, 0, 0), Complex(0.0));
  for (int kx = -8; kx <= 8; ++kx)
    for (int ky = -8; ky <= 8; ++ky)
      for (int c = 0; c < 2; ++c) EXPECT_NEAR(std::abs(u.at(c, kx, ky) - std::conj(u.at(c, -kx, -ky))), 0.0, 1e-15);
}

TEST(SpectralField, GridRoundTrip) {
  std::mt19937_64 rng(5);
  const SpectralField u = random_solenoidal(32, 8, 1.0, rng);
  const SpectralField v = from_grid(to_grid(u), 8);
  for (int kx = -8; kx <= 8; ++kx)
    for (int ky = -8; ky <= 8; ++ky) EXPECT_NEAR(std::abs(v.at(0, kx, ky) - u.at(0, kx, ky)), 0.0, 1e-14);
}

TEST(Norms, ParsevalMatchesQuadrature) {
  std::mt19937_64 rng(9);
  const SpectralField u = random_solenoidal(32, 6, 1.0, rng);
  const NormReport r = norms(u, 2.0, 2.0);
  EXPECT_NEAR(r.l2, std::sqrt(lp_power(to_grid(u), 2.0)), 1e-12 * r.l2);
  EXPECT_NEAR(r.grad_l2, std::sqrt(lp_power(gradient(u), 2.0)), 1e-12 * r.grad_l2);
  EXPECT_NEAR(inner(u, u), r.l2 * r.l2, 1e-12 * r.l2 * r.l2);
}

TEST(Norms, KornIdentityOnRandomFields) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const SpectralField u = random_solenoidal(32, 8, 0.5 * (i % 4), rng);
    const double d2 = lp_power(sym_gradient(u), 2.0);
    const double g = norms(u, 2.0, 2.0).grad_l2;
    EXPECT_NEAR(d2, 0.5 * g * g, 1e-10 * g * g);
  }
}

TEST(Leray, ProjectionRemovesGradients) {
  const int n = 32;
  GridVector g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = 2.0 * kPi * i / n, y = 2.0 * kPi * j / n;
      // grad(sin x cos 2y) + (sin y, 0)
      g.x[static_cast<std::size_t>(i) * n + j] = std::cos(x) * std::cos(2 * y) + std::sin(y);
      g.y[static_cast<std::size_t>(i) * n + j] = -2.0 * std::sin(x) * std::sin(2 * y);
    }
  const SpectralField p = leray_project(g, 8);
  EXPECT_TRUE(p.divergence_free(1e-14));
  EXPECT_NEAR(p.at(0, 0, 1).imag(), -0.5, 1e-14);
  EXPECT_NEAR(std::abs(p.at(0, 1, 2)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(p.at(1, 1, 2)), 0.0, 1e-14);
}

TEST(Snapshot, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  const SpectralField u = random_solenoidal(16, 5, 1.0, rng);
  const auto path = std::filesystem::temp_directory_path() / "nsv_snapshot_roundtrip.bin";
  write_snapshot(path.string(), u);
  const SpectralField v = read_snapshot(path.string());
  ASSERT_EQ(v.grid_size(), 16);
  ASSERT_EQ(v.k_max(), 5);
  for (int c = 0; c < 2; ++c) EXPECT_EQ(u.component(c), v.component(c));
  std::filesystem::remove(path);
}

TEST(Snapshot, RejectsMissingAndCorruptFiles) {
  EXPECT_THROW(read_snapshot("/nonexistent/nsv.bin"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "nsv_snapshot_bad.bin";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    std::fputs("XXXX", f);
    std::fclose(f);
  }
  EXPECT_THROW(read_snapshot(path.string()), IoError);
  std::filesystem::remove(path);
}

TEST(PowAbs, ShortcutsAgreeWithPow) {
  for (double p : {0.5, 1.0, 2.0, 3.0, 4.0, 1.5, 2.7})
    EXPECT_NEAR(pow_abs(1.7, p), std::pow(1.7, p), 1e-14);
  EXPECT_EQ(pow_abs(0.0, 1.5), 0.0);
}
