#pragma once

// Multiplicative noise sum_k phi_k(u) dB_k with phi_k(xi) = (c/k^2) h(xi),
// h(xi) = xi (linear) or xi/(1+|xi|) (saturating), k = 1..n_w.

#include <cstdint>
#include <string>
#include <vector>

#include "nsv/fields.hpp"

namespace nsv {

enum class NoiseFamily { off, linear, saturating };

NoiseFamily parse_noise_family(const std::string& s);
std::string to_string(NoiseFamily f);

struct NoiseModel {
  NoiseFamily family = NoiseFamily::off;
  double amplitude = 0.0;
  int modes = 0;

  bool active() const { return family != NoiseFamily::off && modes > 0 && amplitude != 0.0; }
  // c/k^2, zero when off
  double weight(int k) const;
  // sum_{k<=n_w} weight(k)^2
  double weight_square_sum() const;
  void shape(double ux, double uy, double& hx, double& hy) const {
    if (family == NoiseFamily::saturating) {
      const double s = 1.0 / (1.0 + std::sqrt(ux * ux + uy * uy));
      hx = s * ux;
      hy = s * uy;
    } else {
      hx = ux;
      hy = uy;
    }
  }

  // Analytic constants of the full (untruncated) family.
  double K() const;
  double L() const;
  double C() const;
  // Sum_k ||phi_k(u)||_2^2 <= K'(1 + ||u||_2^2) on the torus.
  double trace_constant() const;

  void validate() const;
};

// phi_k(u) pointwise, k in 1..n_w.
GridVector phi_apply(const GridVector& u, const NoiseModel& model, int k);

struct NoiseConditionReport {
  double K_emp = 0.0, L_emp = 0.0, C_emp = 0.0;
  double K = 0.0, L = 0.0, C = 0.0;
  int samples = 0;
  bool pass = false;
};

NoiseConditionReport verify_noise_conditions(const NoiseModel& model, int samples, std::uint64_t seed = 20240917);

struct WienerIncrement {
  std::vector<double> dB;  // dB[k-1] ~ N(0, dt)
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  std::int64_t step = 0;
};

// Independent Gaussian stream per (seed, path); each step gets its own generator.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  WienerIncrement increment(std::int64_t step, double dt, int n_w) const;
};

WienerIncrement sample_increment(const RngStream& stream, std::int64_t step, double dt, int n_w);

// 64-bit mixing used to derive generator seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace nsv
