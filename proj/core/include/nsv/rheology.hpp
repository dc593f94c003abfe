#pragma once

#include <array>
#include <cmath>

#include "nsv/fields.hpp"

namespace nsv {

struct RheologyParams {
  double p = 2.0;
  double q = 4.0;
  double nu = 0.05;
  double kappa = 0.5;
  double alpha = 0.0;

  double p_conjugate() const { return p / (p - 1.0); }
  // Smallest admissible q when the stabilizer is active.
  double q_min() const;
  // Throws ConfigError naming the violated condition.  nu = 0 is accepted (inviscid audits).
  void validate() const;
};

// A(D) = |D|^{p-2} D at one point, D = [xx xy; xy yy]; zero where |D| = 0.
inline void power_law_point(double dxx, double dxy, double dyy, double p, double& axx, double& axy,
                            double& ayy) {
  if (p == 2.0) {
    axx = dxx;
    axy = dxy;
    ayy = dyy;
    return;
  }
  const double m = std::sqrt(dxx * dxx + 2.0 * dxy * dxy + dyy * dyy);
  const double s = m > 0.0 ? pow_abs(m, p - 2.0) : 0.0;
  axx = s * dxx;
  axy = s * dxy;
  ayy = s * dyy;
}

// |u|^{q-2} at one point, zero where u = 0.
inline double stabilizer_factor(double ux, double uy, double q) {
  if (q == 2.0) return 1.0;
  const double m2 = ux * ux + uy * uy;
  if (m2 == 0.0) return 0.0;
  if (q == 4.0) return m2;
  return pow_abs(std::sqrt(m2), q - 2.0);
}

// Throws ValidationError if D is not symmetric.
SymTensorField power_law_stress(const SymTensorField& D, const RheologyParams& params);
// alpha |u|^{q-2} u
GridVector stabilizer(const GridVector& u, const RheologyParams& params);

using Mat2 = std::array<double, 4>;  // row-major [m00 m01 m10 m11]

struct MonotonicityReport {
  double lhs = 0.0;      // lower bound side of the applicable inequality
  double rhs = 0.0;      // monotonicity side (weighted when 1 < p < 2)
  double product = 0.0;  // (A(M)-A(N)):(M-N)
  bool holds = false;
};

MonotonicityReport monotonicity_gap(const Mat2& M, const Mat2& N, double p);

}  // namespace nsv
