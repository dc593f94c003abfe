#include "nsv/solvability.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nsv/error.hpp"

namespace nsv {

namespace {

std::vector<double> sample_ball(std::size_t n, double R, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<double> c(n);
  double s = 0.0;
  for (auto& v : c) {
    v = nd(rng);
    s += v * v;
  }
  // Radii spread over several decades so small and large states are both probed.
  const double r = R * std::pow(10.0, -3.0 * ud(rng));
  const double scale = s > 0.0 ? r / std::sqrt(s) : 0.0;
  for (auto& v : c) v *= scale;
  return c;
}

double partial_sum_constant(const NoiseModel& noise) {
  double k = 0.0;
  for (int j = 1; j <= noise.modes; ++j) k += std::abs(noise.weight(j));
  return k;
}

struct Evaluated {
  std::vector<double> b, h;
};

Evaluated evaluate(const GalerkinBasis& basis, std::span<const double> c, std::span<const double> f,
                   const RheologyParams& params, const NoiseModel& noise, bool convection) {
  const SpectralField u = basis.reconstruct(c);
  auto ev = evaluate_drift(basis, u, f, params, noise, convection);
  return {std::move(ev.b), std::move(ev.h)};
}

}  // namespace

SolvabilityReport check_weak_monotonicity(int n, double R, int samples, const RheologyParams& params,
                                          const NoiseModel& noise, const SolvabilityOptions& opt) {
  if (!(R > 0.0)) throw ValidationError("check_weak_monotonicity: radius must be positive");
  const GalerkinBasis basis(n, opt.grid);
  std::mt19937_64 rng(opt.seed);
  SolvabilityReport rep;
  rep.radius = R;
  rep.samples = samples;
  double sum_k2 = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) sum_k2 += basis.wavenumber2(j);
  const double wsum = noise.weight_square_sum();
  const double lip = partial_sum_constant(noise);
  // |((u x u - v x v) : grad w)| <= ||grad v||_inf ||w||^2 and ||grad v||_inf <= a R sqrt(sum |k_j|^2).
  rep.analytic_constant = (opt.convection ? kBasisAmplitude * R * std::sqrt(sum_k2) : 0.0) + lip * lip;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const std::vector<double> none;
  for (int s = 0; s < samples; ++s) {
    const auto u = sample_ball(basis.size(), R, rng);
    auto v = sample_ball(basis.size(), R, rng);
    if (s == 0) v = u;
    const auto eu = evaluate(basis, u, none, params, noise, opt.convection);
    const auto evv = evaluate(basis, v, none, params, noise, opt.convection);
    double lhs = 0.0, w2 = 0.0, g2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double w = u[j] - v[j];
      lhs += (eu.b[j] - evv.b[j]) * w;
      w2 += w * w;
      if (!eu.h.empty()) g2 += (eu.h[j] - evv.h[j]) * (eu.h[j] - evv.h[j]);
    }
    lhs += wsum * g2;
    const double bound = rep.analytic_constant * w2;
    const double margin = bound - lhs;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_scale = std::max(std::abs(bound), std::abs(lhs));
    }
    if (w2 > 0.0) rep.fitted_constant = std::max(rep.fitted_constant, lhs / w2);
  }
  rep.pass = std::isfinite(rep.worst_margin) && rep.worst_margin >= -1e-8 * std::max(1.0, rep.worst_scale);
  return rep;
}

SolvabilityReport check_coercivity(int n, int samples, const RheologyParams& params, const NoiseModel& noise,
                                   const SpectralField* f, const SolvabilityOptions& opt) {
  const GalerkinBasis basis(n, opt.grid);
  std::mt19937_64 rng(opt.seed + 1);
  SolvabilityReport rep;
  rep.samples = samples;
  std::vector<double> fc;
  double fnorm = 0.0;
  if (f) {
    fc = basis.project(*f);
    fnorm = norms(*f, 2.0, 2.0).l2;
  }
  const double kt = partial_sum_constant(noise);
  rep.analytic_constant = std::max(0.5, 2.0 * kt * kt * kDomainArea);
  const double wsum = noise.weight_square_sum();
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    // Mixed scales: radii from 1e-3 to 1e2.
    const double R = std::pow(10.0, -3.0 + 5.0 * (s % 11) / 10.0);
    auto u = sample_ball(basis.size(), R, rng);
    if (s == 0) std::fill(u.begin(), u.end(), 0.0);
    const auto ev = evaluate(basis, u, fc, params, noise, opt.convection);
    double lhs = 0.0, u2 = 0.0, g2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      lhs += ev.b[j] * u[j];
      u2 += u[j] * u[j];
      if (!ev.h.empty()) g2 += ev.h[j] * ev.h[j];
    }
    lhs += wsum * g2;
    const double norm = (1.0 + fnorm) * (1.0 + u2);
    const double bound = rep.analytic_constant * norm;
    const double margin = bound - lhs;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_scale = std::max(std::abs(bound), std::abs(lhs));
    }
    rep.fitted_constant = std::max(rep.fitted_constant, lhs / norm);
    rep.radius = std::max(rep.radius, std::sqrt(u2));
  }
  rep.pass = std::isfinite(rep.worst_margin) && rep.worst_margin >= -1e-8 * std::max(1.0, rep.worst_scale);
  return rep;
}

}  // namespace nsv
