#pragma once

// Stochastic Galerkin system on a real L2-orthonormal divergence-free Fourier basis.
//
// Basis: the constant fields e_x/(2pi), e_y/(2pi) (unless the mean is pinned), then for
// each wavevector k in the half-plane {ky > 0} U {ky = 0, kx > 0}, ordered by (|k|^2, kx, ky),
//   a cos(k.x) e_k  and  a sin(k.x) e_k,   e_k = (-ky, kx)/|k|,  a = sqrt(2)/(2 pi).

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsv/fields.hpp"
#include "nsv/noise.hpp"
#include "nsv/rheology.hpp"

namespace nsv {

enum class BasisKind { mean_x, mean_y, cosine, sine };

struct BasisFunction {
  Wavevector k;
  BasisKind kind = BasisKind::cosine;
};

class GalerkinBasis {
 public:
  GalerkinBasis() = default;
  // Throws ConfigError unless the grid is a power of two with 3 k_max < N.
  GalerkinBasis(int n_modes, int grid_size, bool pin_mean = false);

  std::size_t size() const { return functions_.size(); }
  int grid_size() const { return n_; }
  int k_max() const { return k_; }
  bool pin_mean() const { return pin_mean_; }
  const BasisFunction& operator[](std::size_t j) const { return functions_[j]; }
  const std::vector<BasisFunction>& functions() const { return functions_; }
  double wavenumber2(std::size_t j) const { return functions_[j].k.norm2(); }

  SpectralField reconstruct(std::span<const double> c) const;
  // Orthogonal L2 projection onto the span (modes outside the field's box read as zero).
  std::vector<double> project(const SpectralField& u) const;
  GridVector evaluate(std::size_t j) const;
  // Layout as nsv::gradient: xx=d_x psi_x, xy=d_y psi_x, yx=d_x psi_y, yy=d_y psi_y.
  SymTensorField evaluate_gradient(std::size_t j) const;

 private:
  int n_ = 0;
  int k_ = 0;
  bool pin_mean_ = false;
  std::vector<BasisFunction> functions_;
};

inline constexpr double kBasisAmplitude = 0.22507907903927651;  // sqrt(2)/(2 pi)

class MassOperator {
 public:
  MassOperator() = default;
  MassOperator(const GalerkinBasis& basis, double kappa);
  const std::vector<double>& multipliers() const { return m_; }
  std::vector<double> apply(std::span<const double> c) const;
  std::vector<double> solve(std::span<const double> r) const;
  // c^T M c = ||u||^2 + kappa ||grad u||^2
  double energy(std::span<const double> c) const;

 private:
  std::vector<double> m_;
};

// Deterministic body force: none, one fixed field, or one field per step.
class Forcing {
 public:
  static Forcing zero();
  static Forcing constant(SpectralField f);
  static Forcing sequence(std::vector<SpectralField> fs);

  bool is_zero() const { return fields_.empty(); }
  std::size_t length() const { return fields_.size(); }
  // Field active at a step (sequences hold the last entry); null when zero.
  const SpectralField* at(std::int64_t step) const;
  const std::vector<SpectralField>& fields() const { return fields_; }

 private:
  std::vector<SpectralField> fields_;
};

struct Problem {
  GalerkinBasis basis;
  MassOperator mass;
  RheologyParams params;
  NoiseModel noise;
  Forcing forcing;
  double dt = 1e-3;
  bool convection = true;
  std::vector<std::vector<double>> forcing_coeffs;  // (f_i, psi_l) per forcing field

  Problem(GalerkinBasis b, RheologyParams prm, NoiseModel nm, Forcing f, double dt_, bool convection_ = true);
  // Zero vector of basis length when forcing is zero.
  std::span<const double> forcing_at(std::int64_t step) const;

 private:
  std::vector<double> zero_;
};

struct GalerkinState {
  std::shared_ptr<const Problem> problem;
  double t = 0.0;
  std::int64_t step = 0;
  std::vector<double> c;
  RngStream rng;

  SpectralField field() const { return problem->basis.reconstruct(c); }
};

struct DriftEvaluation {
  std::vector<double> b;  // (f, psi) + (u x u : grad psi) - nu <A(u) : D(psi)> - alpha (a(u), psi)
  std::vector<double> h;  // (h(u), psi); empty when the noise is off
  double d_pp = 0.0;      // ||D(u)||_p^p
  double grad_pp = 0.0;   // ||grad u||_p^p
  double u_qq = 0.0;      // ||u||_q^q
  double h_l2sq = 0.0;    // ||h(u)||_2^2 on the grid
  double u_max = 0.0;     // max_x |u|
};

DriftEvaluation evaluate_drift(const GalerkinBasis& basis, const SpectralField& u, std::span<const double> f_coeffs,
                               const RheologyParams& params, const NoiseModel& noise, bool convection = true);

// Throws ValidationError when u is not divergence-free.
std::vector<double> assemble_drift(const GalerkinBasis& basis, const SpectralField& u, const SpectralField& f,
                                   const RheologyParams& params, bool convection = true);

struct StateDiagnostics {
  double t = 0.0;
  double l2 = 0.0;
  double grad_l2 = 0.0;
  double grad_pp = 0.0;
  double u_qq = 0.0;
  double d_pp = 0.0;
  double energy = 0.0;
};

// Discrete energy balance of one step from t to t+dt.
struct LedgerRow {
  double t = 0.0;
  double energy = 0.0;
  double energy_next = 0.0;
  double dissipation = 0.0;    // 2 nu ||D(u)||_p^p dt
  double stabilizer = 0.0;     // 2 alpha ||u||_q^q dt
  double work = 0.0;           // 2 (f,u) dt
  double ito_trace = 0.0;      // sum_k ||M^{-1/2} P phi_k(u)||^2 dt
  double ito_trace_raw = 0.0;  // sum_k ||phi_k(u)||_2^2 dt
  double martingale = 0.0;     // 2 (P Phi(u) dW, u)
  double residual() const {
    return (energy_next - energy) + dissipation + stabilizer - work - ito_trace - martingale;
  }
};

struct StepOutcome {
  GalerkinState next;
  StateDiagnostics diagnostics;  // of the input state
  LedgerRow row;
  WienerIncrement increment;
  double cfl = 0.0;  // dt max|u| k_max
};

// Euler-Maruyama step with an exact diagonal mass solve.  Throws DivergenceError.
// A supplied increment replaces the one drawn from the state's stream.
StepOutcome advance(const GalerkinState& s, const WienerIncrement* increment = nullptr);
GalerkinState step(const GalerkinState& s);
StateDiagnostics diagnose(const GalerkinState& s);

class StoppingMonitor {
 public:
  explicit StoppingMonitor(double threshold = std::numeric_limits<double>::infinity()) : threshold_(threshold) {}
  double threshold() const { return threshold_; }
  const std::optional<double>& tripped_at() const { return tripped_at_; }
  // Records the first time grad_l2 >= threshold; returns true once tripped.
  bool check(double t, double grad_l2);

 private:
  double threshold_;
  std::optional<double> tripped_at_;
};

struct RunOptions {
  bool store_states = true;
  bool store_increments = true;
};

struct Trajectory {
  std::vector<double> times;                // one per state
  std::vector<std::vector<double>> states;  // stored when RunOptions::store_states
  std::vector<StateDiagnostics> diagnostics;
  std::vector<LedgerRow> ledger;  // one per step
  std::vector<WienerIncrement> increments;
  std::vector<double> final_state;
  std::optional<double> tripped_at;
  double max_cfl = 0.0;
  bool cfl_warning = false;
};

// Number of steps for horizon T; throws ConfigError unless T is an integer multiple of dt.
std::int64_t step_count(double T, double dt);
Trajectory run(const GalerkinState& state0, double T, StoppingMonitor& monitor, const RunOptions& options = {});

enum class InitialKind { zero, shear, taylor_green, random, file };

struct InitialCondition {
  InitialKind kind = InitialKind::random;
  double amplitude = 1.0;
  double energy = -1.0;  // when positive, rescale so that ||u||^2 + kappa ||grad u||^2 equals it
  int modes = 16;        // random: number of leading non-mean basis functions excited
  std::uint64_t seed = 1;
  std::string file;
};

InitialKind parse_initial_kind(const std::string& s);
std::string to_string(InitialKind k);
std::vector<double> initial_coefficients(const InitialCondition& ic, const GalerkinBasis& basis, double kappa);

}  // namespace nsv
