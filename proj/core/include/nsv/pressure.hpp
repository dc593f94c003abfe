#pragma once

// Pressure recovery on the torus for the momentum balance
//   (I - kappa Lap) du = (-div H + grad pi) dt + Phi(u) dW,
//   H = u x u - nu A(u) + grad Lap^{-1}(alpha a(u)) - grad Lap^{-1} f,
// where (grad Lap^{-1} g)_ij = d_i Lap^{-1} g_j.  Taking the divergence gives
// Lap pi = div div H, i.e. pihat(k) = k^T Hhat(k) k / |k|^2.

#include <vector>

#include "nsv/fields.hpp"
#include "nsv/galerkin.hpp"

namespace nsv {

// General (not necessarily symmetric) 2x2 tensor field on the grid; pressure is mean-zero.
GridScalar recover_pressure(const SymTensorField& H);

struct TensorSplit {
  SymTensorField H1;  // -nu A(u)
  SymTensorField H2;  // u x u + grad Lap^{-1}(alpha a(u)) - grad Lap^{-1} f
};

// f may be null.
TensorSplit split_tensor(const SpectralField& u, const RheologyParams& params, const SpectralField* f,
                         bool convection = true);

double mean(const GridScalar& g);
double l2_norm(const GridScalar& g);
double lp_norm(const GridScalar& g, double p);

struct PressureOptions {
  double increment_scale = 1.0;  // multiplies every noise increment (linearity checks)
  int slice_every = 1;           // keep every k-th time slice
};

struct PressureParts {
  std::vector<double> times;
  std::vector<GridScalar> pi;            // recovered time-integrated pressure
  std::vector<GridScalar> pi1;           // from H1 at the slice time
  std::vector<GridScalar> pi2;           // from H2 at the slice time
  std::vector<GridScalar> pi_phi;        // stochastic part
  std::vector<GridScalar> pi_h;          // harmonic part
  std::vector<GridScalar> pi_H_integral; // left Riemann sum of pi1 + pi2
  std::vector<double> residual;          // ||pi - pi_h - pi_phi - int pi_H||_2
  std::vector<double> weak_residual;     // max over gradient test modes of the tested momentum identity
  double p_conjugate = 2.0;
  double q0 = 2.0;                       // min{p', q'}
};

// Needs every state and every increment of the trajectory.
PressureParts decompose_pressure(const Problem& problem, const Trajectory& trajectory,
                                 const PressureOptions& options = {});

struct PressureStability {
  double r = 2.0;                 // min{2, p'}
  double pressure_integral = 0.0; // int ||pi_H||_r^r dt
  double tensor_integral = 0.0;   // int ||H||_r^r dt
  double ratio() const { return tensor_integral > 0.0 ? pressure_integral / tensor_integral : 0.0; }
};

PressureStability pressure_stability(const Problem& problem, const Trajectory& trajectory);

}  // namespace nsv
