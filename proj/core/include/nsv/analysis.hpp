#pragma once

// Verification harness: energy ledgers, Monte-Carlo moments, weak-form residuals,
// the alpha sweep, twin-path uniqueness runs and the square-domain divergence study.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "nsv/galerkin.hpp"

namespace nsv {

// Everything needed to build a Problem and its initial states.
struct Scenario {
  RheologyParams params;
  NoiseModel noise;
  int n_modes = 64;
  int grid = 64;
  bool pin_mean = false;
  bool convection = true;
  double dt = 1e-3;
  double T = 0.1;
  std::uint64_t seed = 1;
  InitialCondition ic;
  Forcing forcing = Forcing::zero();
  double stop_threshold = std::numeric_limits<double>::infinity();
};

std::shared_ptr<const Problem> make_problem(const Scenario& sc);
GalerkinState initial_state(const Scenario& sc, std::shared_ptr<const Problem> problem, std::uint64_t path = 0);
// One path of the scenario.
Trajectory run_path(const Scenario& sc, std::shared_ptr<const Problem> problem, std::uint64_t path,
                    const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Energy ledger

struct EnergyAudit {
  std::vector<LedgerRow> rows;       // recomputed from stored states and increments
  std::vector<double> cumulative;    // running sum of residuals, one per state (starts at 0)
  double max_abs_residual = 0.0;     // per step
  double total_residual = 0.0;
  double recompute_gap = 0.0;        // max |stored residual - recomputed residual|
  double bookkeeping_gap = 0.0;      // max |residual() - explicit sum of row terms|
  double energy_start = 0.0, energy_end = 0.0;
  double max_energy_increase = 0.0;  // max over steps of E(t+dt) - E(t)
  bool nonincreasing = true;
};

// Needs every state and increment.  Throws ValidationError on length mismatch.
EnergyAudit energy_audit(const Problem& problem, const Trajectory& trajectory);

// Same scenario at dt and dt/2.
struct RefinementReport {
  double dt_coarse = 0.0, dt_fine = 0.0;
  double coarse = 0.0, fine = 0.0;  // the measured error at each step size
  double ratio() const { return coarse != 0.0 ? fine / coarse : 0.0; }
};

// |E(T) - E(0)| / E(0) at dt and dt/2 (single deterministic path).
RefinementReport energy_drift_refinement(const Scenario& sc);
// |sum of ledger residuals| at dt and dt/2 (single deterministic path).
RefinementReport residual_refinement(const Scenario& sc);

struct EnsembleLedger {
  std::vector<double> times;
  std::vector<double> mean;  // ensemble mean of the cumulative residual
  std::vector<double> se;    // standard error of that mean
  int paths = 0;
  int excluded = 0;
  double worst_z = 0.0;      // max |mean| / se over output times with se > 0
  bool pass = false;         // |mean| <= 3 se at every output time after t = 0
};

EnsembleLedger ensemble_energy_audit(const Scenario& sc, int paths, int output_every = 1, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Moments

struct MomentStatistic {
  double estimate = 0.0;
  double se = 0.0;
  std::optional<double> bound;  // explicit right-hand side, when one applies
  bool within_bound() const { return !bound || estimate <= *bound; }
};

struct MomentReport {
  double gamma = 2.0;
  int paths = 0;
  int excluded = 0;
  std::vector<std::uint64_t> excluded_paths;
  MomentStatistic sup_energy;        // E[(sup_t E(t))^{gamma/2}]
  MomentStatistic mean_energy_end;   // E[E(T)^{gamma/2}]
  MomentStatistic gradient;          // E[(int ||grad u||_p^p dt)^{gamma/2}]
  MomentStatistic dissipation;       // E[(int ||D(u)||_p^p dt)^{gamma/2}]
  MomentStatistic stabilizer;        // alpha E[(int ||u||_q^q dt)^{gamma/2}]
  double K_truncated = 0.0;
  double forcing_l2sq = 0.0;         // sup over the forcing of ||f||_2^2
  double energy0 = 0.0;
  bool pass = false;
};

// Throws ConfigError when gamma < 2 or paths < 1.
MomentReport moment_estimate(const Scenario& sc, int paths, double gamma, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Weak form

struct WeakFormReport {
  double max_residual = 0.0;
  double scale = 0.0;       // max over modes and times of the largest participating term
  double relative() const { return scale > 0.0 ? max_residual / scale : max_residual; }
  std::size_t worst_mode = 0;
  std::size_t worst_step = 0;
};

// Tested identity for each test field phi and every stored time t_n:
//   (u_n, phi) + kappa(grad u_n, grad phi) - (u_0, phi) - kappa(grad u_0, grad phi)
//   - sum_{m<n} dt [ (u x u : grad phi) - nu <A(u) : D(phi)> - alpha (a(u), phi) + (f, phi) ]
//   - sum_{m<n} (Phi(u_m) dW_m, phi)
// every pairing evaluated by grid quadrature.  Throws ValidationError for a
// non-solenoidal test field or missing states/increments.
WeakFormReport weak_form_residual(const Problem& problem, const Trajectory& trajectory,
                                  const std::vector<SpectralField>& tests);
// All basis functions as test fields.
WeakFormReport weak_form_residual(const Problem& problem, const Trajectory& trajectory);

// ---------------------------------------------------------------------------
// Stabilized system

struct AlphaSweepRow {
  double alpha = 0.0;
  double stabilizer_integral = 0.0;  // 2 alpha int ||u||_q^q dt
  double distance_to_reference = 0.0;  // ||u_alpha(T) - u_0(T)||_2
  double distance_to_previous = 0.0;   // to the previous alpha in the sweep
};

struct AlphaSweepReport {
  std::vector<AlphaSweepRow> rows;
  bool stabilizer_decreasing = false;
  bool distance_decreasing = false;
};

// Runs path 0 for every alpha and for the alpha = 0 reference.  Throws
// ConfigError unless the alphas are positive and strictly decreasing.
AlphaSweepReport alpha_sweep(const Scenario& sc, const std::vector<double>& alphas);

// ---------------------------------------------------------------------------
// Pathwise uniqueness

// max ||w||_4^2 / (||w||_2 ||grad w||_2) over random mean-free solenoidal fields.
double calibrate_ladyzhenskaya(int samples = 200, std::uint64_t seed = 4242);

struct TwinPath {
  std::vector<double> times;
  std::vector<double> weight;        // phi(t_n)
  std::vector<double> gap_energy;    // ||w||_2^2 + kappa ||grad w||_2^2
  double delta0 = 0.0;               // ||grad w(0)||_2
  double weighted_peak = 0.0;        // sup_n phi E_w
  std::size_t peak_index = 0;
  double final_gap = 0.0;            // sqrt(phi(T) E_w(T))
  bool identical = true;             // w == 0 bitwise at every step
  bool diverged = false;
};

struct TwinReport {
  double C1 = 0.0;             // weight constant
  double C = 0.0;              // max over paths of weighted peak / delta0^2
  double mean_ratio = 0.0;
  double C_theory = 0.0;       // (1/eta1 + kappa) exp(L^2 T), eta1 = 1
  double mean_final_gap = 0.0;
  int paths = 0;
  int excluded = 0;
  bool all_identical = true;
  std::vector<TwinPath> series;  // only the first few paths are kept
};

// Both initial coefficient vectors live in the scenario's basis; identical
// increments drive the two runs of each path.  Throws ValidationError when the
// vector lengths differ from the basis size.
TwinReport twin_uniqueness(const Scenario& sc, const std::vector<double>& u0_a, const std::vector<double>& u0_b,
                           int paths, double C1, unsigned threads = 1, int keep_series = 4);

// ---------------------------------------------------------------------------
// Monotone-limit shadow

struct MonotoneGapReport {
  double integral = 0.0;  // int int (A(u_n) - A(u_n')) : (D(u_n) - D(u_n')) dx dt
  double scale = 0.0;     // int int |A(u_n) - A(u_n')| |D(u_n) - D(u_n')| dx dt
  bool pass = false;      // integral >= -1e-8 scale
};

// Runs path 0 at n_modes = n and n_prime with identical increments.
MonotoneGapReport monotone_limit_gap(const Scenario& sc, int n, int n_prime);

// ---------------------------------------------------------------------------
// Divergence problem on the unit square

struct BogovskiiRow {
  int resolution = 0;
  std::vector<double> residual;  // per datum
  std::vector<double> ratio;     // ||grad w||_2 / ||xi||_2 per datum
  std::vector<double> boundary;  // max |w| on the boundary per datum
};

struct BogovskiiStudy {
  std::vector<BogovskiiRow> rows;
  double constant = 0.0;         // 1.1 x the largest ratio at the coarsest resolution
  bool residual_decreasing = false;
  bool ratio_bounded = false;
};

// Random data are combinations of eight zero-mean cosine products with
// N(0,1) weights; the reference datum sin(pi x) sin(pi y) - 4/pi^2 is datum 0.
BogovskiiStudy bogovskii_study(const std::vector<int>& resolutions, int random_count, std::uint64_t seed);

}  // namespace nsv
