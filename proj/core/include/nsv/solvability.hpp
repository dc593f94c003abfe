#pragma once

// Sampled checks of weak monotonicity and weak coercivity for the assembled
// finite-dimensional drift b and noise matrix G.

#include <cstdint>

#include "nsv/galerkin.hpp"

namespace nsv {

struct SolvabilityOptions {
  int grid = 32;
  bool convection = true;
  std::uint64_t seed = 7;
};

struct SolvabilityReport {
  double radius = 0.0;
  int samples = 0;
  double worst_margin = 0.0;       // min over samples of (analytic bound - left side)
  double worst_scale = 0.0;        // magnitude of the bound at the worst sample
  double fitted_constant = 0.0;    // max over samples of left side / normaliser
  double analytic_constant = 0.0;
  bool pass = false;
};

// <b(u)-b(v), u-v> + ||G(u)-G(v)||^2 <= C(R,n) ||u-v||^2 over pairs in the n-ball of radius R.
SolvabilityReport check_weak_monotonicity(int n, double R, int samples, const RheologyParams& params,
                                          const NoiseModel& noise, const SolvabilityOptions& opt = {});

// <b(u),u> + ||G(u)||^2 <= C (1 + ||f||) (1 + ||u||^2); f may be null.
SolvabilityReport check_coercivity(int n, int samples, const RheologyParams& params, const NoiseModel& noise,
                                   const SpectralField* f, const SolvabilityOptions& opt = {});

}  // namespace nsv
