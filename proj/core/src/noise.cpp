#include "nsv/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "nsv/error.hpp"

namespace nsv {

NoiseFamily parse_noise_family(const std::string& s) {
  if (s == "off" || s == "none") return NoiseFamily::off;
  if (s == "linear") return NoiseFamily::linear;
  if (s == "saturating") return NoiseFamily::saturating;
  throw ConfigError("unknown noise family '" + s + "' (expected off, linear or saturating)");
}

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::linear: return "linear";
    case NoiseFamily::saturating: return "saturating";
    default: return "off";
  }
}

double NoiseModel::weight(int k) const {
  if (family == NoiseFamily::off) return 0.0;
  return amplitude / (static_cast<double>(k) * k);
}

double NoiseModel::weight_square_sum() const {
  double s = 0.0;
  for (int k = 1; k <= modes; ++k) s += weight(k) * weight(k);
  return s;
}

double NoiseModel::K() const { return family == NoiseFamily::off ? 0.0 : std::abs(amplitude) * kPi * kPi / 6.0; }
double NoiseModel::L() const { return K(); }
double NoiseModel::C() const { return family == NoiseFamily::off ? 0.0 : amplitude * amplitude; }

// (sum|phi_k|)^2 <= K^2 (1+|xi|)^2 <= 2K^2 (1+|xi|^2), integrated over a box of area 4 pi^2 > 1.
double NoiseModel::trace_constant() const { return 2.0 * K() * K() * kDomainArea; }

void NoiseModel::validate() const {
  if (modes < 0) throw ConfigError("noise.modes must be non-negative");
  if (!(amplitude >= 0.0)) throw ConfigError("noise.amplitude must be non-negative");
}

GridVector phi_apply(const GridVector& u, const NoiseModel& model, int k) {
  if (k < 1 || k > model.modes)
    throw ValidationError("phi_apply: mode index " + std::to_string(k) + " outside 1.." + std::to_string(model.modes));
  GridVector out(u.n);
  if (model.family == NoiseFamily::off) return out;
  const double w = model.weight(k);
  for (std::size_t i = 0; i < u.x.size(); ++i) {
    double hx, hy;
    model.shape(u.x[i], u.y[i], hx, hy);
    out.x[i] = w * hx;
    out.y[i] = w * hy;
  }
  return out;
}

NoiseConditionReport verify_noise_conditions(const NoiseModel& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("verify_noise_conditions: samples must be >= 1");
  NoiseConditionReport r;
  r.K = model.K();
  r.L = model.L();
  r.C = model.C();
  r.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), logr(-3.0, 3.0), logd(-6.0, 2.0);
  auto draw = [&](std::uniform_real_distribution<double>& lr) {
    const double m = std::pow(10.0, lr(rng)), a = ang(rng);
    return std::array<double, 2>{m * std::cos(a), m * std::sin(a)};
  };
  for (int s = 0; s < samples; ++s) {
    auto xi = s == 0 ? std::array<double, 2>{0.0, 0.0} : draw(logr);
    const auto d = draw(logd);
    const std::array<double, 2> zeta{xi[0] + d[0], xi[1] + d[1]};
    double hx, hy, gx, gy;
    model.shape(xi[0], xi[1], hx, hy);
    model.shape(zeta[0], zeta[1], gx, gy);
    const double nxi = std::hypot(xi[0], xi[1]);
    const double dist = std::hypot(xi[0] - zeta[0], xi[1] - zeta[1]);
    double sum_phi = 0.0, sum_diff = 0.0, sup_c = 0.0;
    for (int k = 1; k <= model.modes; ++k) {
      const double w = model.weight(k);
      const double ph = std::abs(w) * std::hypot(hx, hy);
      sum_phi += ph;
      sum_diff += std::abs(w) * std::hypot(hx - gx, hy - gy);
      sup_c = std::max(sup_c, static_cast<double>(k) * k * ph * ph);
    }
    r.K_emp = std::max(r.K_emp, sum_phi / (1.0 + nxi));
    if (dist > 0.0) r.L_emp = std::max(r.L_emp, sum_diff / dist);
    r.C_emp = std::max(r.C_emp, sup_c / (1.0 + nxi * nxi));
  }
  const double tol = 1e-9;
  r.pass = r.K_emp <= r.K * (1.0 + tol) + tol && r.L_emp <= r.L * (1.0 + tol) + tol &&
           r.C_emp <= r.C * (1.0 + tol) + tol;
  return r;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(a) ^ b) ^ c);
}

WienerIncrement RngStream::increment(std::int64_t step, double dt, int n_w) const {
  if (!(dt > 0.0)) throw ValidationError("sample_increment: dt must be positive");
  if (n_w < 0) throw ValidationError("sample_increment: negative number of modes");
  WienerIncrement w;
  w.dt = dt;
  w.seed = seed;
  w.path = path;
  w.step = step;
  w.dB.resize(static_cast<std::size_t>(n_w));
  if (n_w == 0) return w;
  std::mt19937_64 gen(mix_seed(seed, path, static_cast<std::uint64_t>(step)));
  std::normal_distribution<double> nd(0.0, std::sqrt(dt));
  for (auto& v : w.dB) v = nd(gen);
  return w;
}

WienerIncrement sample_increment(const RngStream& stream, std::int64_t step, double dt, int n_w) {
  return stream.increment(step, dt, n_w);
}

}  // namespace nsv
