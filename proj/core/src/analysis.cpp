#include "nsv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "nsv/bogovskii.hpp"
#include "nsv/error.hpp"
#include "nsv/parallel.hpp"

namespace nsv {

namespace {

// Non-owning handle for code paths that need a shared_ptr to a caller-owned Problem.
std::shared_ptr<const Problem> borrow(const Problem& pb) { return std::shared_ptr<const Problem>(std::shared_ptr<const Problem>(), &pb); }

struct Moments {
  double mean = 0.0, se = 0.0;
};

Moments mean_se(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  for (double x : v) m.mean += x;
  m.mean /= n;
  if (v.size() > 1) {
    double s = 0.0;
    for (double x : v) s += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(s / (n - 1.0) / n);
  }
  return m;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Copy of f on grid n (modes truncated to what the grid can hold).
SpectralField on_grid(const SpectralField& f, int n) {
  if (f.grid_size() == n) return f;
  const int k = std::min(f.k_max(), (n - 2) / 2);
  SpectralField g(n, k);
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky)
      for (int c = 0; c < 2; ++c) g.at(c, kx, ky) = f.at(c, kx, ky);
  return g;
}

double sum_weights(const NoiseModel& noise) {
  double k = 0.0;
  for (int j = 1; j <= noise.modes; ++j) k += std::abs(noise.weight(j));
  return k;
}

}  // namespace

std::shared_ptr<const Problem> make_problem(const Scenario& sc) {
  GalerkinBasis basis(sc.n_modes, sc.grid, sc.pin_mean);
  return std::make_shared<const Problem>(std::move(basis), sc.params, sc.noise, sc.forcing, sc.dt, sc.convection);
}

GalerkinState initial_state(const Scenario& sc, std::shared_ptr<const Problem> problem, std::uint64_t path) {
  GalerkinState s;
  s.c = initial_coefficients(sc.ic, problem->basis, sc.params.kappa);
  s.problem = std::move(problem);
  s.rng = RngStream{sc.seed, path};
  return s;
}

Trajectory run_path(const Scenario& sc, std::shared_ptr<const Problem> problem, std::uint64_t path,
                    const RunOptions& options) {
  StoppingMonitor monitor(sc.stop_threshold);
  const GalerkinState s0 = initial_state(sc, std::move(problem), path);
  return run(s0, sc.T, monitor, options);
}

// ---------------------------------------------------------------------------

EnergyAudit energy_audit(const Problem& pb, const Trajectory& tr) {
  const std::size_t steps = tr.ledger.size();
  if (tr.states.size() != steps + 1)
    throw ValidationError("energy_audit: " + std::to_string(tr.states.size()) + " stored states for " +
                          std::to_string(steps) + " ledger rows");
  if (tr.increments.size() != steps)
    throw ValidationError("energy_audit: noise history has " + std::to_string(tr.increments.size()) +
                          " increments for " + std::to_string(steps) + " steps");
  EnergyAudit a;
  a.rows.reserve(steps);
  a.cumulative.assign(1, 0.0);
  auto handle = borrow(pb);
  a.energy_start = pb.mass.energy(tr.states.front());
  a.energy_end = pb.mass.energy(tr.states.back());
  for (std::size_t i = 0; i < steps; ++i) {
    GalerkinState s;
    s.problem = handle;
    s.step = static_cast<std::int64_t>(i);
    s.t = static_cast<double>(i) * pb.dt;
    s.c = tr.states[i];
    const StepOutcome out = advance(s, &tr.increments[i]);
    const LedgerRow& r = out.row;
    const double res = r.residual();
    const double sum = (r.energy_next - r.energy) + r.dissipation + r.stabilizer - r.work - r.ito_trace - r.martingale;
    a.bookkeeping_gap = std::max(a.bookkeeping_gap, std::abs(res - sum));
    a.recompute_gap = std::max(a.recompute_gap, std::abs(res - tr.ledger[i].residual()));
    a.max_abs_residual = std::max(a.max_abs_residual, std::abs(res));
    a.total_residual += res;
    a.cumulative.push_back(a.total_residual);
    const double inc = r.energy_next - r.energy;
    a.max_energy_increase = std::max(a.max_energy_increase, inc);
    if (inc > 0.0) a.nonincreasing = false;
    a.rows.push_back(r);
  }
  return a;
}

namespace {

template <class Measure>
RefinementReport refine(const Scenario& sc, Measure&& measure) {
  RefinementReport rep;
  Scenario fine = sc;
  fine.dt = sc.dt / 2.0;
  rep.dt_coarse = sc.dt;
  rep.dt_fine = fine.dt;
  for (int pass = 0; pass < 2; ++pass) {
    const Scenario& s = pass == 0 ? sc : fine;
    auto pb = make_problem(s);
    const Trajectory tr = run_path(s, pb, 0, RunOptions{false, false});
    (pass == 0 ? rep.coarse : rep.fine) = measure(tr);
  }
  return rep;
}

}  // namespace

RefinementReport energy_drift_refinement(const Scenario& sc) {
  return refine(sc, [](const Trajectory& tr) {
    const double e0 = tr.diagnostics.front().energy, e1 = tr.diagnostics.back().energy;
    return e0 > 0.0 ? std::abs(e1 - e0) / e0 : std::abs(e1 - e0);
  });
}

RefinementReport residual_refinement(const Scenario& sc) {
  return refine(sc, [](const Trajectory& tr) {
    double s = 0.0;
    for (const auto& r : tr.ledger) s += r.residual();
    return std::abs(s);
  });
}

EnsembleLedger ensemble_energy_audit(const Scenario& sc, int paths, int output_every, unsigned threads) {
  if (paths < 1) throw ConfigError("ensemble audit needs at least one path");
  if (output_every < 1) throw ConfigError("output interval must be positive");
  auto pb = make_problem(sc);
  const std::int64_t steps = step_count(sc.T, sc.dt);
  std::vector<std::size_t> outputs;
  for (std::int64_t n = output_every; n <= steps; n += output_every) outputs.push_back(static_cast<std::size_t>(n));
  if (outputs.empty() || outputs.back() != static_cast<std::size_t>(steps)) outputs.push_back(static_cast<std::size_t>(steps));

  std::vector<std::vector<double>> cum(static_cast<std::size_t>(paths));
  std::vector<char> ok(static_cast<std::size_t>(paths), 0);
  parallel_for(static_cast<std::size_t>(paths), threads, [&](std::size_t p) {
    try {
      const Trajectory tr = run_path(sc, pb, p, RunOptions{false, false});
      if (tr.ledger.size() != static_cast<std::size_t>(steps)) return;  // stopped early
      std::vector<double> c;
      double acc = 0.0;
      std::size_t next = 0;
      for (std::size_t i = 0; i < tr.ledger.size(); ++i) {
        acc += tr.ledger[i].residual();
        if (next < outputs.size() && i + 1 == outputs[next]) {
          c.push_back(acc);
          ++next;
        }
      }
      cum[p] = std::move(c);
      ok[p] = 1;
    } catch (const DivergenceError&) {
    }
  });

  EnsembleLedger e;
  e.paths = paths;
  e.pass = true;
  for (std::size_t p = 0; p < cum.size(); ++p)
    if (!ok[p]) ++e.excluded;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    std::vector<double> v;
    for (std::size_t p = 0; p < cum.size(); ++p)
      if (ok[p]) v.push_back(cum[p][k]);
    const Moments m = mean_se(v);
    e.times.push_back(static_cast<double>(outputs[k]) * sc.dt);
    e.mean.push_back(m.mean);
    e.se.push_back(m.se);
    if (m.se > 0.0) e.worst_z = std::max(e.worst_z, std::abs(m.mean) / m.se);
    if (std::abs(m.mean) > 3.0 * m.se) e.pass = false;
  }
  if (e.excluded == paths) e.pass = false;
  return e;
}

// ---------------------------------------------------------------------------

MomentReport moment_estimate(const Scenario& sc, int paths, double gamma, unsigned threads) {
  if (paths < 1) throw ConfigError("moment estimate needs at least one path");
  if (!(gamma >= 2.0)) {
    std::ostringstream os;
    os << "moment exponent condition violated: gamma=" << gamma << " < 2";
    throw ConfigError(os.str());
  }
  auto pb = make_problem(sc);
  const double r = gamma / 2.0;
  struct PathStat {
    double sup_e = 0.0, e_end = 0.0, grad = 0.0, diss = 0.0, stab = 0.0;
    bool ok = false;
  };
  std::vector<PathStat> stats(static_cast<std::size_t>(paths));
  parallel_for(stats.size(), threads, [&](std::size_t p) {
    try {
      const Trajectory tr = run_path(sc, pb, p, RunOptions{false, false});
      PathStat s;
      for (const auto& d : tr.diagnostics) s.sup_e = std::max(s.sup_e, d.energy);
      s.e_end = tr.diagnostics.back().energy;
      for (std::size_t i = 0; i < tr.ledger.size(); ++i) {
        s.grad += tr.diagnostics[i].grad_pp * sc.dt;
        s.diss += tr.diagnostics[i].d_pp * sc.dt;
        s.stab += tr.diagnostics[i].u_qq * sc.dt;
      }
      s.ok = std::isfinite(s.sup_e) && std::isfinite(s.grad) && std::isfinite(s.stab);
      stats[p] = s;
    } catch (const DivergenceError&) {
    }
  });

  MomentReport rep;
  rep.gamma = gamma;
  rep.paths = paths;
  std::vector<double> se, ee, g, d, st;
  for (std::size_t p = 0; p < stats.size(); ++p) {
    const auto& s = stats[p];
    if (!s.ok) {
      ++rep.excluded;
      rep.excluded_paths.push_back(p);
      continue;
    }
    se.push_back(std::pow(s.sup_e, r));
    ee.push_back(std::pow(s.e_end, r));
    g.push_back(std::pow(s.grad, r));
    d.push_back(std::pow(s.diss, r));
    st.push_back(sc.params.alpha * std::pow(s.stab, r));
  }
  auto fill = [](MomentStatistic& m, const std::vector<double>& v) {
    const Moments x = mean_se(v);
    m.estimate = x.mean;
    m.se = x.se;
  };
  fill(rep.sup_energy, se);
  fill(rep.mean_energy_end, ee);
  fill(rep.gradient, g);
  fill(rep.dissipation, d);
  fill(rep.stabilizer, st);

  // Explicit right-hand sides from the Ito balance with 2(f,u) <= ||f||^2 + ||u||^2,
  // sum_k ||phi_k(u)||^2 <= C_K (|O| + ||u||^2), C_K = 2 K^2, and Davis' inequality with constant 3.
  const double K = sum_weights(sc.noise);
  rep.K_truncated = K;
  double f2 = 0.0;
  for (const auto& f : sc.forcing.fields()) f2 = std::max(f2, std::pow(norms(f, 2.0, 2.0).l2, 2));
  rep.forcing_l2sq = f2;
  const double Y0 = pb->mass.energy(initial_state(sc, pb, 0).c);
  rep.energy0 = Y0;
  const double T = sc.T, O = kDomainArea, CK = 2.0 * K * K;
  const double A0 = f2 + CK * O, A1 = 1.0 + CK;
  const double B0 = A0 + 2.0 * (r - 1.0) * CK * O;
  const double B1 = (r - 1.0) * B0 + r * (A1 + 2.0 * (r - 1.0) * CK);
  const double EYr = (std::pow(Y0, r) + B0 * T) * std::exp(B1 * T);  // sup_t E[Y^r]
  const double intEYr = T * EYr;
  rep.mean_energy_end.bound = EYr;
  rep.sup_energy.bound = 2.0 * (std::pow(Y0, r) + B0 * T + B1 * intEYr +
                                18.0 * r * r * CK * (O * T / r + (O * (r - 1.0) / r + 1.0) * intEYr));
  if (gamma == 2.0) {
    const double EY = (Y0 + A0 * T) * std::exp(A1 * T);
    const double rhs = Y0 + A0 * T + A1 * T * EY;  // >= 2 nu E int ||D||_p^p + 2 alpha E int ||u||_q^q
    if (sc.params.nu > 0.0) {
      rep.dissipation.bound = rhs / (2.0 * sc.params.nu);
      if (sc.params.p == 2.0) rep.gradient.bound = rhs / sc.params.nu;  // ||grad u||^2 = 2 ||D u||^2
    }
    rep.stabilizer.bound = rhs / 2.0;
  }
  rep.pass = rep.excluded < paths && rep.sup_energy.within_bound() && rep.mean_energy_end.within_bound() &&
             rep.gradient.within_bound() && rep.dissipation.within_bound() && rep.stabilizer.within_bound();
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

struct TestGrid {
  GridVector psi;
  SymTensorField grad;  // xx=d_x psi_x, xy=d_y psi_x, yx=d_x psi_y, yy=d_y psi_y
};

}  // namespace

WeakFormReport weak_form_residual(const Problem& pb, const Trajectory& tr, const std::vector<SpectralField>& tests) {
  const std::size_t steps = tr.ledger.size();
  if (tr.states.size() != steps + 1) throw ValidationError("weak_form_residual: trajectory must store every state");
  if (pb.noise.active() && tr.increments.size() != steps)
    throw ValidationError("weak_form_residual: noise history does not match the trajectory");
  const int n = pb.basis.grid_size();
  std::vector<TestGrid> tg;
  tg.reserve(tests.size());
  for (std::size_t l = 0; l < tests.size(); ++l) {
    const auto& t = tests[l];
    if (t.grid_size() != n) throw ValidationError("weak_form_residual: test field grid differs from the basis grid");
    const double scale = std::max(1.0, norms(t, 2.0, 2.0).grad_l2);
    if (!t.divergence_free(1e-12 * scale))
      throw ValidationError("weak_form_residual: test field " + std::to_string(l) + " is not solenoidal");
    tg.push_back({to_grid(t), gradient(t)});
  }
  const std::size_t np = static_cast<std::size_t>(n) * n;
  const double cell = (2.0 * kPi / n) * (2.0 * kPi / n);
  const auto& prm = pb.params;
  const std::size_t L = tests.size();

  // Per test: mass pairing at t_0, running integral and running absolute scale.
  std::vector<double> mass0(L), integ(L, 0.0), absacc(L, 0.0);
  WeakFormReport rep;
  std::vector<double> gx(np), gy(np), fx(np), fy(np);
  for (std::size_t m = 0; m <= steps; ++m) {
    const SpectralField u = pb.basis.reconstruct(tr.states[m]);
    const GridVector ug = to_grid(u);
    const SymTensorField gu = gradient(u);
    // Mass pairing and residual check at t_m.
    for (std::size_t l = 0; l < L; ++l) {
      const auto& ps = tg[l].psi;
      const auto& gp = tg[l].grad;
      double a = 0.0, b = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        a += ug.x[i] * ps.x[i] + ug.y[i] * ps.y[i];
        b += gu.xx[i] * gp.xx[i] + gu.xy[i] * gp.xy[i] + gu.yx[i] * gp.yx[i] + gu.yy[i] * gp.yy[i];
      }
      const double massm = (a + prm.kappa * b) * cell;
      if (m == 0) mass0[l] = massm;
      const double res = std::abs(massm - mass0[l] - integ[l]);
      const double sc = std::max({std::abs(massm), std::abs(mass0[l]), absacc[l]});
      if (res > rep.max_residual) {
        rep.max_residual = res;
        rep.worst_mode = l;
        rep.worst_step = m;
      }
      rep.scale = std::max(rep.scale, sc);
    }
    if (m == steps) break;

    // Integrand over [t_m, t_{m+1}).
    double S = 0.0;
    if (pb.noise.active()) {
      const auto& inc = tr.increments[m];
      for (int k = 1; k <= pb.noise.modes; ++k) S += pb.noise.weight(k) * inc.dB[static_cast<std::size_t>(k - 1)];
    }
    const SpectralField* f = pb.forcing.at(static_cast<std::int64_t>(m));
    std::fill(fx.begin(), fx.end(), 0.0);
    std::fill(fy.begin(), fy.end(), 0.0);
    if (f) {
      const GridVector fg = to_grid(on_grid(*f, n));
      fx = fg.x;
      fy = fg.y;
    }
    SymTensorField H(n);  // u x u - nu A(u)
    for (std::size_t i = 0; i < np; ++i) {
      const double ux = ug.x[i], uy = ug.y[i];
      const double dxy = 0.5 * (gu.xy[i] + gu.yx[i]);
      double axx, axy, ayy;
      power_law_point(gu.xx[i], dxy, gu.yy[i], prm.p, axx, axy, ayy);
      const double cx = pb.convection ? 1.0 : 0.0;
      H.xx[i] = cx * ux * ux - prm.nu * axx;
      H.xy[i] = cx * ux * uy - prm.nu * axy;
      H.yx[i] = cx * uy * ux - prm.nu * axy;
      H.yy[i] = cx * uy * uy - prm.nu * ayy;
      const double s = prm.alpha > 0.0 ? prm.alpha * stabilizer_factor(ux, uy, prm.q) : 0.0;
      double hx = 0.0, hy = 0.0;
      if (pb.noise.active()) pb.noise.shape(ux, uy, hx, hy);
      // body terms: f - alpha a(u) (times dt) and h(u) S (not times dt)
      fx[i] -= s * ux;
      fy[i] -= s * uy;
      gx[i] = S * hx;
      gy[i] = S * hy;
    }
    for (std::size_t l = 0; l < L; ++l) {
      const auto& ps = tg[l].psi;
      const auto& gp = tg[l].grad;
      double th = 0.0, tb = 0.0, tn = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        th += H.xx[i] * gp.xx[i] + H.xy[i] * gp.xy[i] + H.yx[i] * gp.yx[i] + H.yy[i] * gp.yy[i];
        tb += fx[i] * ps.x[i] + fy[i] * ps.y[i];
        tn += gx[i] * ps.x[i] + gy[i] * ps.y[i];
      }
      th *= cell * pb.dt;
      tb *= cell * pb.dt;
      tn *= cell;
      integ[l] += th + tb + tn;
      absacc[l] += std::abs(th) + std::abs(tb) + std::abs(tn);
    }
  }
  return rep;
}

WeakFormReport weak_form_residual(const Problem& pb, const Trajectory& tr) {
  std::vector<SpectralField> tests;
  tests.reserve(pb.basis.size());
  for (std::size_t j = 0; j < pb.basis.size(); ++j) {
    std::vector<double> e(pb.basis.size(), 0.0);
    e[j] = 1.0;
    tests.push_back(pb.basis.reconstruct(e));
  }
  return weak_form_residual(pb, tr, tests);
}

// ---------------------------------------------------------------------------

AlphaSweepReport alpha_sweep(const Scenario& sc, const std::vector<double>& alphas) {
  if (alphas.empty()) throw ConfigError("alpha sweep needs at least one alpha");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw ConfigError("alpha sweep values must be positive");
    if (i > 0 && !(alphas[i] < alphas[i - 1])) throw ConfigError("alpha sweep values must be strictly decreasing");
  }
  auto final_of = [&](double alpha, double* stab) {
    Scenario s = sc;
    s.params.alpha = alpha;
    auto pb = make_problem(s);
    const Trajectory tr = run_path(s, pb, 0, RunOptions{false, false});
    if (stab) {
      *stab = 0.0;
      for (const auto& r : tr.ledger) *stab += r.stabilizer;
    }
    return tr.final_state;
  };
  const auto ref = final_of(0.0, nullptr);
  AlphaSweepReport rep;
  std::vector<double> prev;
  for (double a : alphas) {
    AlphaSweepRow row;
    row.alpha = a;
    const auto c = final_of(a, &row.stabilizer_integral);
    row.distance_to_reference = l2_distance(c, ref);
    row.distance_to_previous = prev.empty() ? 0.0 : l2_distance(c, prev);
    prev = c;
    rep.rows.push_back(row);
  }
  rep.stabilizer_decreasing = true;
  rep.distance_decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (!(rep.rows[i].stabilizer_integral < rep.rows[i - 1].stabilizer_integral)) rep.stabilizer_decreasing = false;
    if (!(rep.rows[i].distance_to_reference < rep.rows[i - 1].distance_to_reference)) rep.distance_decreasing = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------

double calibrate_ladyzhenskaya(int samples, std::uint64_t seed) {
  // 4 k_max < N so that |w|^4 is integrated exactly by the grid rule.
  const int n = 64, kmax_cap = 12;
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const int k = 1 + s % kmax_cap;
    const double decay = 0.5 * (s % 7);
    const SpectralField w = random_solenoidal(n, k, decay, rng);
    const NormReport nr = norms(w, 2.0, 4.0);
    if (nr.l2 == 0.0 || nr.grad_l2 == 0.0) continue;
    best = std::max(best, nr.lq * nr.lq / (nr.l2 * nr.grad_l2));
  }
  return best;
}

TwinReport twin_uniqueness(const Scenario& sc, const std::vector<double>& u0_a, const std::vector<double>& u0_b,
                           int paths, double C1, unsigned threads, int keep_series) {
  if (paths < 1) throw ConfigError("twin runs need at least one path");
  auto pb = make_problem(sc);
  const std::size_t nb = pb->basis.size();
  if (u0_a.size() != nb || u0_b.size() != nb)
    throw ValidationError("twin_uniqueness: initial data must lie in the same Galerkin span (expected " +
                          std::to_string(nb) + " coefficients, got " + std::to_string(u0_a.size()) + " and " +
                          std::to_string(u0_b.size()) + ")");
  const double kappa = sc.params.kappa;
  std::vector<TwinPath> out(static_cast<std::size_t>(paths));
  parallel_for(out.size(), threads, [&](std::size_t p) {
    TwinPath tp;
    try {
      StoppingMonitor m1, m2;
      GalerkinState a, b;
      a.problem = b.problem = pb;
      a.rng = b.rng = RngStream{sc.seed, p};
      a.c = u0_a;
      b.c = u0_b;
      const Trajectory ta = run(a, sc.T, m1, RunOptions{true, false});
      const Trajectory tb = run(b, sc.T, m2, RunOptions{true, false});
      double integral = 0.0;
      for (std::size_t n = 0; n < ta.states.size(); ++n) {
        double l2 = 0.0, g2 = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
          const double w = ta.states[n][j] - tb.states[n][j];
          if (w != 0.0) tp.identical = false;
          l2 += w * w;
          g2 += pb->basis.wavenumber2(j) * w * w;
        }
        if (n == 0) tp.delta0 = std::sqrt(g2);
        const double phi = std::exp(-C1 * integral);
        const double ew = l2 + kappa * g2;
        tp.times.push_back(ta.times[n]);
        tp.weight.push_back(phi);
        tp.gap_energy.push_back(ew);
        if (phi * ew > tp.weighted_peak) {
          tp.weighted_peak = phi * ew;
          tp.peak_index = n;
        }
        integral += tb.diagnostics[n].grad_l2 * sc.dt;
      }
      tp.final_gap = std::sqrt(tp.weight.back() * tp.gap_energy.back());
    } catch (const DivergenceError&) {
      tp.diverged = true;
    }
    out[p] = std::move(tp);
  });

  TwinReport rep;
  rep.C1 = C1;
  rep.paths = paths;
  rep.C_theory = (1.0 + kappa) * std::exp(std::pow(sum_weights(sc.noise), 2) * sc.T);
  std::vector<double> ratios, gaps;
  for (auto& tp : out) {
    if (tp.diverged) {
      ++rep.excluded;
      continue;
    }
    rep.all_identical = rep.all_identical && tp.identical;
    const double d2 = tp.delta0 * tp.delta0;
    if (d2 > 0.0) {
      const double q = tp.weighted_peak / d2;
      ratios.push_back(q);
      rep.C = std::max(rep.C, q);
    }
    gaps.push_back(tp.final_gap);
  }
  rep.mean_ratio = mean_se(ratios).mean;
  rep.mean_final_gap = mean_se(gaps).mean;
  for (int i = 0; i < std::min<int>(keep_series, paths); ++i) rep.series.push_back(out[static_cast<std::size_t>(i)]);
  return rep;
}

// ---------------------------------------------------------------------------

MonotoneGapReport monotone_limit_gap(const Scenario& sc, int n, int n_prime) {
  if (!(n < n_prime)) throw ConfigError("monotone-limit check needs n < n'");
  Scenario a = sc, b = sc;
  a.n_modes = n;
  b.n_modes = n_prime;
  auto pa = make_problem(a), pbp = make_problem(b);
  const Trajectory ta = run_path(a, pa, 0, RunOptions{true, false});
  const Trajectory tb = run_path(b, pbp, 0, RunOptions{true, false});
  MonotoneGapReport rep;
  const std::size_t steps = std::min(ta.ledger.size(), tb.ledger.size());
  const double cell = std::pow(2.0 * kPi / sc.grid, 2);
  const double p = sc.params.p;
  for (std::size_t m = 0; m < steps; ++m) {
    const SymTensorField Da = sym_gradient(pa->basis.reconstruct(ta.states[m]));
    const SymTensorField Db = sym_gradient(pbp->basis.reconstruct(tb.states[m]));
    double acc = 0.0, sc_acc = 0.0;
    for (std::size_t i = 0; i < Da.xx.size(); ++i) {
      double a1, a2, a3, b1, b2, b3;
      power_law_point(Da.xx[i], Da.xy[i], Da.yy[i], p, a1, a2, a3);
      power_law_point(Db.xx[i], Db.xy[i], Db.yy[i], p, b1, b2, b3);
      const double e1 = Da.xx[i] - Db.xx[i], e2 = Da.xy[i] - Db.xy[i], e3 = Da.yy[i] - Db.yy[i];
      const double g1 = a1 - b1, g2 = a2 - b2, g3 = a3 - b3;
      acc += g1 * e1 + 2.0 * g2 * e2 + g3 * e3;
      sc_acc += std::sqrt(g1 * g1 + 2 * g2 * g2 + g3 * g3) * std::sqrt(e1 * e1 + 2 * e2 * e2 + e3 * e3);
    }
    rep.integral += acc * cell * sc.dt;
    rep.scale += sc_acc * cell * sc.dt;
  }
  rep.pass = rep.integral >= -1e-8 * std::max(rep.scale, 1e-300);
  return rep;
}

// ---------------------------------------------------------------------------

BogovskiiStudy bogovskii_study(const std::vector<int>& resolutions, int random_count, std::uint64_t seed) {
  if (resolutions.empty()) throw ConfigError("divergence study needs at least one resolution");
  using Fn = std::function<double(double, double)>;
  std::vector<Fn> basis;
  basis.push_back([](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y) - 4.0 / (kPi * kPi); });
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b) {
      if (a == 0 && b == 0) continue;
      basis.push_back([a, b](double x, double y) { return std::cos(a * kPi * x) * std::cos(b * kPi * y); });
    }
  // weights[d][j]: datum d as a combination of basis functions.
  std::vector<std::vector<double>> weights;
  weights.push_back(std::vector<double>(basis.size(), 0.0));
  weights[0][0] = 1.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int r = 0; r < random_count; ++r) {
    std::vector<double> w(basis.size(), 0.0);
    for (std::size_t j = 1; j < basis.size(); ++j) w[j] = nd(rng);
    weights.push_back(std::move(w));
  }
  std::vector<Fn> data;
  for (const auto& w : weights)
    data.push_back([w, &basis](double x, double y) {
      double s = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] != 0.0) s += w[j] * basis[j](x, y);
      return s;
    });

  BogovskiiStudy st;
  for (int M : resolutions) {
    const auto wb = bogovskii_solve_batch(basis, M);
    BogovskiiRow row;
    row.resolution = M;
    for (std::size_t d = 0; d < data.size(); ++d) {
      SquareField w;
      w.m = M;
      w.x.assign(wb[0].x.size(), 0.0);
      w.y.assign(wb[0].y.size(), 0.0);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const double c = weights[d][j];
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < w.x.size(); ++i) {
          w.x[i] += c * wb[j].x[i];
          w.y[i] += c * wb[j].y[i];
        }
      }
      const auto diag = bogovskii_diagnostics(w, data[d]);
      row.residual.push_back(diag.divergence_residual);
      row.ratio.push_back(diag.xi_l2 > 0.0 ? diag.grad_l2 / diag.xi_l2 : 0.0);
      row.boundary.push_back(diag.boundary_max);
    }
    st.rows.push_back(std::move(row));
  }
  st.constant = 1.1 * *std::max_element(st.rows.front().ratio.begin(), st.rows.front().ratio.end());
  st.residual_decreasing = true;
  st.ratio_bounded = true;
  for (std::size_t k = 0; k < st.rows.size(); ++k)
    for (std::size_t d = 0; d < data.size(); ++d) {
      if (k > 0 && !(st.rows[k].residual[d] < st.rows[k - 1].residual[d])) st.residual_decreasing = false;
      if (!(st.rows[k].ratio[d] <= st.constant)) st.ratio_bounded = false;
    }
  return st;
}

}  // namespace nsv
