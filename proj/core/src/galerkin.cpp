#include "nsv/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "nsv/error.hpp"
#include "nsv/snapshot.hpp"

namespace nsv {

using detail::Fft2d;
using detail::slot;
using detail::unpack_pair;

namespace {

bool in_half_plane(const Wavevector& k) { return k.ky > 0 || (k.ky == 0 && k.kx > 0); }

struct UnitPerp {
  double ex, ey;
};
UnitPerp perp(const Wavevector& k) {
  const double n = std::sqrt(static_cast<double>(k.norm2()));
  return {-k.ky / n, k.kx / n};
}

// Coefficient of basis function bf in a field whose Fourier coefficients at k are (fx, fy).
double pair_coefficient(const BasisFunction& bf, Complex fx, Complex fy) {
  switch (bf.kind) {
    case BasisKind::mean_x: return 2.0 * kPi * fx.real();
    case BasisKind::mean_y: return 2.0 * kPi * fy.real();
    default: break;
  }
  const auto e = perp(bf.k);
  const Complex z = fx * e.ex + fy * e.ey;
  const double s = kDomainArea * kBasisAmplitude;
  return bf.kind == BasisKind::cosine ? s * z.real() : -s * z.imag();
}

}  // namespace

GalerkinBasis::GalerkinBasis(int n_modes, int grid_size, bool pin_mean) : n_(grid_size), pin_mean_(pin_mean) {
  if (n_modes < 1) throw ConfigError("number of Galerkin modes must be positive");
  if (!is_power_of_two(grid_size))
    throw ConfigError("grid size must be a power of two, got " + std::to_string(grid_size));
  if (!pin_mean) {
    functions_.push_back({{0, 0}, BasisKind::mean_x});
    if (static_cast<int>(functions_.size()) < n_modes) functions_.push_back({{0, 0}, BasisKind::mean_y});
  }
  const std::size_t wanted = static_cast<std::size_t>(n_modes);
  for (int r = 1; functions_.size() < wanted; ++r) {
    // Half-plane wavevectors with |k| <= r come first in the global (|k|^2, kx, ky) order.
    std::vector<Wavevector> ks;
    for (const auto& k : canonical_modes(r))
      if (in_half_plane(k) && k.norm2() <= r * r) ks.push_back(k);
    if (functions_.size() + 2 * ks.size() < wanted) continue;
    for (const auto& k : ks) {
      if (functions_.size() < wanted) functions_.push_back({k, BasisKind::cosine});
      if (functions_.size() < wanted) functions_.push_back({k, BasisKind::sine});
    }
  }
  k_ = 0;
  for (const auto& f : functions_) k_ = std::max({k_, std::abs(f.k.kx), std::abs(f.k.ky)});
  validate_grid(grid_size, k_);
  if (3 * k_ >= grid_size)
    throw ConfigError("grid size " + std::to_string(grid_size) + " aliases cubic products at k_max=" +
                      std::to_string(k_) + " (need 3 k_max < N)");
}

SpectralField GalerkinBasis::reconstruct(std::span<const double> c) const {
  if (c.size() != functions_.size()) throw ValidationError("coefficient vector does not match basis size");
  SpectralField u(n_, k_);
  const double h = 0.5 * kBasisAmplitude;
  for (std::size_t j = 0; j < functions_.size(); ++j) {
    const auto& bf = functions_[j];
    if (bf.kind == BasisKind::mean_x) {
      u.at(0, 0, 0) += c[j] / (2.0 * kPi);
      continue;
    }
    if (bf.kind == BasisKind::mean_y) {
      u.at(1, 0, 0) += c[j] / (2.0 * kPi);
      continue;
    }
    const auto e = perp(bf.k);
    const Complex zp = bf.kind == BasisKind::cosine ? Complex(h * c[j], 0.0) : Complex(0.0, -h * c[j]);
    const Complex zm = std::conj(zp);
    u.at(0, bf.k.kx, bf.k.ky) += zp * e.ex;
    u.at(1, bf.k.kx, bf.k.ky) += zp * e.ey;
    u.at(0, -bf.k.kx, -bf.k.ky) += zm * e.ex;
    u.at(1, -bf.k.kx, -bf.k.ky) += zm * e.ey;
  }
  return u;
}

std::vector<double> GalerkinBasis::project(const SpectralField& u) const {
  std::vector<double> c(functions_.size(), 0.0);
  for (std::size_t j = 0; j < functions_.size(); ++j) {
    const auto& k = functions_[j].k;
    if (!u.in_box(k.kx, k.ky)) continue;
    c[j] = pair_coefficient(functions_[j], u.at(0, k.kx, k.ky), u.at(1, k.kx, k.ky));
  }
  return c;
}

GridVector GalerkinBasis::evaluate(std::size_t j) const {
  GridVector g(n_);
  const auto& bf = functions_.at(j);
  const double h = 2.0 * kPi / n_;
  for (int i = 0; i < n_; ++i)
    for (int l = 0; l < n_; ++l) {
      const std::size_t idx = static_cast<std::size_t>(i) * n_ + l;
      if (bf.kind == BasisKind::mean_x) {
        g.x[idx] = 1.0 / (2.0 * kPi);
        continue;
      }
      if (bf.kind == BasisKind::mean_y) {
        g.y[idx] = 1.0 / (2.0 * kPi);
        continue;
      }
      const auto e = perp(bf.k);
      const double ph = bf.k.kx * i * h + bf.k.ky * l * h;
      const double v = kBasisAmplitude * (bf.kind == BasisKind::cosine ? std::cos(ph) : std::sin(ph));
      g.x[idx] = v * e.ex;
      g.y[idx] = v * e.ey;
    }
  return g;
}

SymTensorField GalerkinBasis::evaluate_gradient(std::size_t j) const {
  SymTensorField t(n_);
  const auto& bf = functions_.at(j);
  if (bf.kind == BasisKind::mean_x || bf.kind == BasisKind::mean_y) return t;
  const auto e = perp(bf.k);
  const double h = 2.0 * kPi / n_;
  for (int i = 0; i < n_; ++i)
    for (int l = 0; l < n_; ++l) {
      const std::size_t idx = static_cast<std::size_t>(i) * n_ + l;
      const double ph = bf.k.kx * i * h + bf.k.ky * l * h;
      const double d = kBasisAmplitude * (bf.kind == BasisKind::cosine ? -std::sin(ph) : std::cos(ph));
      t.xx[idx] = d * bf.k.kx * e.ex;
      t.xy[idx] = d * bf.k.ky * e.ex;
      t.yx[idx] = d * bf.k.kx * e.ey;
      t.yy[idx] = d * bf.k.ky * e.ey;
    }
  return t;
}

MassOperator::MassOperator(const GalerkinBasis& basis, double kappa) {
  m_.resize(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) m_[j] = 1.0 + kappa * basis.wavenumber2(j);
}

std::vector<double> MassOperator::apply(std::span<const double> c) const {
  std::vector<double> r(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) r[j] = m_[j] * c[j];
  return r;
}

std::vector<double> MassOperator::solve(std::span<const double> r) const {
  std::vector<double> c(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) c[j] = r[j] / m_[j];
  return c;
}

double MassOperator::energy(std::span<const double> c) const {
  double e = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) e += m_[j] * c[j] * c[j];
  return e;
}

Forcing Forcing::zero() { return Forcing{}; }

Forcing Forcing::constant(SpectralField f) {
  Forcing fr;
  fr.fields_.push_back(std::move(f));
  return fr;
}

Forcing Forcing::sequence(std::vector<SpectralField> fs) {
  if (fs.empty()) throw ConfigError("forcing sequence is empty");
  Forcing fr;
  fr.fields_ = std::move(fs);
  return fr;
}

const SpectralField* Forcing::at(std::int64_t step) const {
  if (fields_.empty()) return nullptr;
  const auto i = std::clamp<std::int64_t>(step, 0, static_cast<std::int64_t>(fields_.size()) - 1);
  return &fields_[static_cast<std::size_t>(i)];
}

Problem::Problem(GalerkinBasis b, RheologyParams prm, NoiseModel nm, Forcing f, double dt_, bool convection_)
    : basis(std::move(b)), params(prm), noise(nm), forcing(std::move(f)), dt(dt_), convection(convection_) {
  params.validate();
  noise.validate();
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  mass = MassOperator(basis, params.kappa);
  for (const auto& fld : forcing.fields()) forcing_coeffs.push_back(basis.project(fld));
  zero_.assign(basis.size(), 0.0);
}

std::span<const double> Problem::forcing_at(std::int64_t step) const {
  if (forcing_coeffs.empty()) return zero_;
  const auto i = std::clamp<std::int64_t>(step, 0, static_cast<std::int64_t>(forcing_coeffs.size()) - 1);
  return forcing_coeffs[static_cast<std::size_t>(i)];
}

namespace {

struct Workspace {
  int n = 0;
  std::vector<Complex> z[4];
  void resize(int n_) {
    if (n == n_) return;
    n = n_;
    for (auto& v : z) v.assign(static_cast<std::size_t>(n_) * n_, Complex{});
  }
};

thread_local Workspace tl_ws;

}  // namespace

DriftEvaluation evaluate_drift(const GalerkinBasis& basis, const SpectralField& u, std::span<const double> f_coeffs,
                               const RheologyParams& prm, const NoiseModel& noise, bool convection) {
  const int n = basis.grid_size();
  if (u.grid_size() != n) throw ValidationError("field grid does not match the basis grid");
  if (3 * u.k_max() >= n) throw ValidationError("field truncation aliases cubic products on this grid");
  Workspace& ws = tl_ws;
  ws.resize(n);
  auto& z0 = ws.z[0];
  auto& z1 = ws.z[1];
  auto& z2 = ws.z[2];
  std::fill(z0.begin(), z0.end(), Complex{});
  std::fill(z1.begin(), z1.end(), Complex{});
  std::fill(z2.begin(), z2.end(), Complex{});
  const Complex I(0.0, 1.0);
  const int k = u.k_max();
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky) {
      const Complex ux = u.at(0, kx, ky), uy = u.at(1, kx, ky);
      if (ux == Complex{} && uy == Complex{}) continue;
      const std::size_t s = slot(n, kx, ky);
      z0[s] = ux + I * uy;
      z1[s] = I * (double(kx) * ux) + I * (I * (double(ky) * ux));
      z2[s] = I * (double(kx) * uy) + I * (I * (double(ky) * uy));
    }
  const Fft2d& fft = Fft2d::get(n);
  fft.backward(z0.data());
  fft.backward(z1.data());
  fft.backward(z2.data());

  const bool with_noise = noise.active();
  const bool with_stab = prm.alpha > 0.0;
  auto& w3 = ws.z[3];
  DriftEvaluation ev;
  double d_pp = 0.0, g_pp = 0.0, u_qq = 0.0, h2 = 0.0, umax2 = 0.0;
  const std::size_t np = static_cast<std::size_t>(n) * n;
  for (std::size_t i = 0; i < np; ++i) {
    const double ux = z0[i].real(), uy = z0[i].imag();
    const double dxux = z1[i].real(), dyux = z1[i].imag();
    const double dxuy = z2[i].real(), dyuy = z2[i].imag();
    const double dxy = 0.5 * (dyux + dxuy);
    double axx, axy, ayy;
    power_law_point(dxux, dxy, dyuy, prm.p, axx, axy, ayy);
    const double u2 = ux * ux + uy * uy;
    umax2 = std::max(umax2, u2);
    d_pp += pow_abs(std::sqrt(dxux * dxux + 2.0 * dxy * dxy + dyuy * dyuy), prm.p);
    g_pp += pow_abs(std::sqrt(dxux * dxux + dyux * dyux + dxuy * dxuy + dyuy * dyuy), prm.p);
    u_qq += pow_abs(std::sqrt(u2), prm.q);
    const double hxx = (convection ? ux * ux : 0.0) - prm.nu * axx;
    const double hxy = (convection ? ux * uy : 0.0) - prm.nu * axy;
    const double hyy = (convection ? uy * uy : 0.0) - prm.nu * ayy;
    double ax = 0.0, ay = 0.0;
    if (with_stab) {
      const double s = prm.alpha * stabilizer_factor(ux, uy, prm.q);
      ax = s * ux;
      ay = s * uy;
    }
    double hx = 0.0, hy = 0.0;
    if (with_noise) {
      noise.shape(ux, uy, hx, hy);
      h2 += hx * hx + hy * hy;
    }
    z0[i] = Complex(hxx, hxy);
    z1[i] = Complex(hyy, ax);
    z2[i] = Complex(ay, hx);
    w3[i] = Complex(hy, 0.0);
  }
  const double cell = (2.0 * kPi / n) * (2.0 * kPi / n);
  ev.d_pp = d_pp * cell;
  ev.grad_pp = g_pp * cell;
  ev.u_qq = u_qq * cell;
  ev.h_l2sq = h2 * cell;
  ev.u_max = std::sqrt(umax2);

  fft.forward(z0.data());
  fft.forward(z1.data());
  fft.forward(z2.data());
  if (with_noise) fft.forward(w3.data());
  const double inv = 1.0 / static_cast<double>(np);

  const std::size_t m = basis.size();
  ev.b.assign(m, 0.0);
  if (with_noise) ev.h.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& bf = basis[j];
    const int kx = bf.k.kx, ky = bf.k.ky;
    Complex Hxx, Hxy, Hyy, ax, ay, hx, hy;
    unpack_pair(z0, n, kx, ky, Hxx, Hxy);
    unpack_pair(z1, n, kx, ky, Hyy, ax);
    unpack_pair(z2, n, kx, ky, ay, hx);
    const Complex Fx = -I * (double(kx) * Hxx + double(ky) * Hxy) - ax;
    const Complex Fy = -I * (double(kx) * Hxy + double(ky) * Hyy) - ay;
    ev.b[j] = pair_coefficient(bf, Fx * inv, Fy * inv) + (f_coeffs.empty() ? 0.0 : f_coeffs[j]);
    if (with_noise) {
      hy = w3[slot(n, kx, ky)] * 0.5 + std::conj(w3[slot(n, -kx, -ky)]) * 0.5;
      ev.h[j] = pair_coefficient(bf, hx * inv, hy * inv);
    }
  }
  return ev;
}

std::vector<double> assemble_drift(const GalerkinBasis& basis, const SpectralField& u, const SpectralField& f,
                                   const RheologyParams& params, bool convection) {
  const double scale = std::max(1.0, norms(u, 2.0, 2.0).grad_l2);
  if (!u.divergence_free(1e-12 * scale)) throw ValidationError("assemble_drift: velocity is not divergence-free");
  const auto fc = basis.project(f);
  return evaluate_drift(basis, u, fc, params, NoiseModel{}, convection).b;
}

namespace {

StateDiagnostics make_diagnostics(const Problem& pb, const GalerkinState& s, const DriftEvaluation& ev) {
  StateDiagnostics d;
  d.t = s.t;
  double l2 = 0.0, g2 = 0.0;
  for (std::size_t j = 0; j < s.c.size(); ++j) {
    l2 += s.c[j] * s.c[j];
    g2 += pb.basis.wavenumber2(j) * s.c[j] * s.c[j];
  }
  d.l2 = std::sqrt(l2);
  d.grad_l2 = std::sqrt(g2);
  d.grad_pp = ev.grad_pp;
  d.u_qq = ev.u_qq;
  d.d_pp = ev.d_pp;
  d.energy = pb.mass.energy(s.c);
  return d;
}

}  // namespace

StepOutcome advance(const GalerkinState& s, const WienerIncrement* increment) {
  const Problem& pb = *s.problem;
  const auto f = pb.forcing_at(s.step);
  const SpectralField u = pb.basis.reconstruct(s.c);
  const DriftEvaluation ev = evaluate_drift(pb.basis, u, f, pb.params, pb.noise, pb.convection);

  StepOutcome out;
  out.diagnostics = make_diagnostics(pb, s, ev);
  if (increment) {
    if (increment->dB.size() != static_cast<std::size_t>(pb.noise.modes))
      throw ValidationError("supplied noise increment has the wrong number of modes");
    out.increment = *increment;
  } else {
    out.increment = s.rng.increment(s.step, pb.dt, pb.noise.modes);
  }
  out.cfl = pb.dt * ev.u_max * pb.basis.k_max();

  double S = 0.0;  // sum_k weight(k) dB_k
  for (int k = 1; k <= pb.noise.modes; ++k) S += pb.noise.weight(k) * out.increment.dB[static_cast<std::size_t>(k - 1)];

  const auto& m = pb.mass.multipliers();
  const std::size_t n = s.c.size();
  GalerkinState nx;
  nx.problem = s.problem;
  nx.rng = s.rng;
  nx.step = s.step + 1;
  nx.t = static_cast<double>(nx.step) * pb.dt;
  nx.c.resize(n);
  double work = 0.0, mart = 0.0, trace_m = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double g = ev.h.empty() ? 0.0 : ev.h[j] * S;
    nx.c[j] = s.c[j] + (pb.dt * ev.b[j] + g) / m[j];
    work += f[j] * s.c[j];
    mart += g * s.c[j];
    if (!ev.h.empty()) trace_m += ev.h[j] * ev.h[j] / m[j];
  }
  for (double v : nx.c)
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite Galerkin coefficient after step " << nx.step << " (t=" << nx.t << ")";
      throw DivergenceError(nx.step, os.str());
    }
  const double wsum = pb.noise.weight_square_sum();
  LedgerRow& r = out.row;
  r.t = s.t;
  r.energy = out.diagnostics.energy;
  r.energy_next = pb.mass.energy(nx.c);
  r.dissipation = 2.0 * pb.params.nu * ev.d_pp * pb.dt;
  r.stabilizer = 2.0 * pb.params.alpha * ev.u_qq * pb.dt;
  r.work = 2.0 * work * pb.dt;
  r.ito_trace = wsum * trace_m * pb.dt;
  r.ito_trace_raw = wsum * ev.h_l2sq * pb.dt;
  r.martingale = 2.0 * mart;
  out.next = std::move(nx);
  return out;
}

GalerkinState step(const GalerkinState& s) { return advance(s).next; }

StateDiagnostics diagnose(const GalerkinState& s) {
  const Problem& pb = *s.problem;
  const SpectralField u = pb.basis.reconstruct(s.c);
  const auto ev = evaluate_drift(pb.basis, u, pb.forcing_at(s.step), pb.params, NoiseModel{}, pb.convection);
  return make_diagnostics(pb, s, ev);
}

bool StoppingMonitor::check(double t, double grad_l2) {
  if (tripped_at_) return true;
  if (grad_l2 >= threshold_) tripped_at_ = t;
  return tripped_at_.has_value();
}

std::int64_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(T >= 0.0)) throw ConfigError("horizon T must be non-negative");
  const double r = T / dt;
  const auto steps = static_cast<std::int64_t>(std::llround(r));
  if (std::abs(static_cast<double>(steps) * dt - T) > 1e-10 * std::max(1.0, T)) {
    std::ostringstream os;
    os.precision(17);
    os << "step count condition violated: T=" << T << " is not an integer multiple of dt=" << dt;
    throw ConfigError(os.str());
  }
  return steps;
}

Trajectory run(const GalerkinState& state0, double T, StoppingMonitor& monitor, const RunOptions& options) {
  const Problem& pb = *state0.problem;
  const std::int64_t steps = step_count(T, pb.dt);
  Trajectory tr;
  tr.times.reserve(static_cast<std::size_t>(steps) + 1);
  tr.diagnostics.reserve(static_cast<std::size_t>(steps) + 1);
  tr.ledger.reserve(static_cast<std::size_t>(steps));
  GalerkinState s = state0;
  for (std::int64_t n = 0;; ++n) {
    if (options.store_states) tr.states.push_back(s.c);
    tr.times.push_back(s.t);
    const bool last = n == steps;
    StepOutcome out;
    if (last) {
      tr.diagnostics.push_back(diagnose(s));
    } else {
      out = advance(s);
      tr.diagnostics.push_back(out.diagnostics);
    }
    if (monitor.check(s.t, tr.diagnostics.back().grad_l2) || last) {
      tr.tripped_at = monitor.tripped_at();
      break;
    }
    tr.ledger.push_back(out.row);
    tr.max_cfl = std::max(tr.max_cfl, out.cfl);
    if (options.store_increments) tr.increments.push_back(std::move(out.increment));
    s = std::move(out.next);
  }
  tr.final_state = s.c;
  tr.cfl_warning = tr.max_cfl > 0.5;
  return tr;
}

InitialKind parse_initial_kind(const std::string& s) {
  if (s == "zero") return InitialKind::zero;
  if (s == "shear") return InitialKind::shear;
  if (s == "taylor_green" || s == "taylor-green") return InitialKind::taylor_green;
  if (s == "random") return InitialKind::random;
  if (s == "file") return InitialKind::file;
  throw ConfigError("unknown initial condition '" + s + "' (expected zero, shear, taylor_green, random or file)");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::zero: return "zero";
    case InitialKind::shear: return "shear";
    case InitialKind::taylor_green: return "taylor_green";
    case InitialKind::file: return "file";
    default: return "random";
  }
}

std::vector<double> initial_coefficients(const InitialCondition& ic, const GalerkinBasis& basis, double kappa) {
  const int n = basis.grid_size();
  std::vector<double> c(basis.size(), 0.0);
  auto from_analytic = [&](auto fn) {
    GridVector g(n);
    const double h = 2.0 * kPi / n;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        const std::size_t idx = static_cast<std::size_t>(i) * n + l;
        fn(i * h, l * h, g.x[idx], g.y[idx]);
      }
    return basis.project(from_grid(g, std::min(basis.k_max() + 1, (n - 2) / 2)));
  };
  switch (ic.kind) {
    case InitialKind::zero: break;
    case InitialKind::shear:
      c = from_analytic([&](double, double y, double& ux, double& uy) {
        ux = ic.amplitude * std::sin(y);
        uy = 0.0;
      });
      break;
    case InitialKind::taylor_green:
      c = from_analytic([&](double x, double y, double& ux, double& uy) {
        ux = ic.amplitude * std::sin(x) * std::cos(y);
        uy = -ic.amplitude * std::cos(x) * std::sin(y);
      });
      break;
    case InitialKind::random: {
      std::mt19937_64 rng(mix_seed(ic.seed, 0x1c0ffee, 0));
      std::normal_distribution<double> nd(0.0, 1.0);
      int excited = 0;
      for (std::size_t j = 0; j < basis.size() && excited < ic.modes; ++j) {
        if (basis[j].kind == BasisKind::mean_x || basis[j].kind == BasisKind::mean_y) continue;
        c[j] = ic.amplitude * nd(rng) / (1.0 + basis.wavenumber2(j));
        ++excited;
      }
      break;
    }
    case InitialKind::file: c = basis.project(read_snapshot(ic.file)); break;
  }
  if (ic.energy > 0.0) {
    double e = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) e += (1.0 + kappa * basis.wavenumber2(j)) * c[j] * c[j];
    if (e > 0.0) {
      const double s = std::sqrt(ic.energy / e);
      for (auto& v : c) v *= s;
    }
  }
  return c;
}

}  // namespace nsv
