#pragma once

// Divergence solver on the unit square via the Bogovskii integral
//   w(x) = int xi(y) (x-y) int_1^inf omega(y + t(x-y)) t dt dy,
// omega a smooth radial bump of radius 0.25 about (0.5, 0.5) with unit mass.
// In polar coordinates about x (y = x - r e) this becomes
//   w(x) = int_{S^1} e [Omega0(x,e) int_0^rho xi r dr + Omega1(x,e) int_0^rho xi dr] d theta,
//   Omega_m(x,e) = int_0^inf s^m omega(x + s e) ds,
// with rho the distance from x to the boundary along -e.

#include <functional>
#include <vector>

namespace nsv {

struct BogovskiiProblem {
  std::function<double(double, double)> xi;
  int resolution = 32;  // M: w is returned on the (M+1) x (M+1) node grid of spacing 1/M
};

struct SquareField {
  int m = 0;  // nodes per side minus one
  std::vector<double> x, y;
  double& ux(int i, int j) { return x[static_cast<std::size_t>(i) * (m + 1) + j]; }
  double& uy(int i, int j) { return y[static_cast<std::size_t>(i) * (m + 1) + j]; }
  double ux(int i, int j) const { return x[static_cast<std::size_t>(i) * (m + 1) + j]; }
  double uy(int i, int j) const { return y[static_cast<std::size_t>(i) * (m + 1) + j]; }
};

double bogovskii_bump(double x, double y);

// Throws ValidationError when xi does not have zero mean.
SquareField bogovskii_solve(const BogovskiiProblem& prob);

// Batched variant sharing the xi-independent ray integrals.
std::vector<SquareField> bogovskii_solve_batch(const std::vector<std::function<double(double, double)>>& xis,
                                               int resolution);

struct BogovskiiDiagnostics {
  double divergence_residual = 0.0;  // ||div_h w - xi||_2 over interior nodes
  double grad_l2 = 0.0;              // ||grad_h w||_2
  double xi_l2 = 0.0;
  double boundary_max = 0.0;         // max |w| on the boundary nodes
};

BogovskiiDiagnostics bogovskii_diagnostics(const SquareField& w, const std::function<double(double, double)>& xi);

// Gauss-Legendre mean of xi over the unit square and its L1 norm.
void square_moments(const std::function<double(double, double)>& xi, double& mean, double& l1);

}  // namespace nsv
