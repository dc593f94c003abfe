#include "nsv/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "nsv/error.hpp"

namespace nsv {

using detail::Fft2d;
using detail::slot;
using detail::unpack_pair;

std::vector<Wavevector> canonical_modes(int k_max) {
  std::vector<Wavevector> out;
  out.reserve(static_cast<std::size_t>(2 * k_max + 1) * (2 * k_max + 1));
  for (int kx = -k_max; kx <= k_max; ++kx)
    for (int ky = -k_max; ky <= k_max; ++ky) out.push_back({kx, ky});
  std::sort(out.begin(), out.end(), [](const Wavevector& a, const Wavevector& b) {
    if (a.norm2() != b.norm2()) return a.norm2() < b.norm2();
    if (a.kx != b.kx) return a.kx < b.kx;
    return a.ky < b.ky;
  });
  return out;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void validate_grid(int grid_size, int k_max) {
  if (k_max < 0) throw ConfigError("k_max must be non-negative, got " + std::to_string(k_max));
  if (!is_power_of_two(grid_size))
    throw ConfigError("grid size must be a power of two, got " + std::to_string(grid_size));
  if (grid_size < 2 * k_max + 2)
    throw ConfigError("grid size " + std::to_string(grid_size) + " cannot resolve k_max=" +
                      std::to_string(k_max) + " (need N >= 2 k_max + 2)");
}

SymTensorField::SymTensorField(int n_) : n(n_) {
  const auto sz = static_cast<std::size_t>(n_) * n_;
  xx.assign(sz, 0.0);
  xy.assign(sz, 0.0);
  yx.assign(sz, 0.0);
  yy.assign(sz, 0.0);
}

bool SymTensorField::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < xy.size(); ++i) {
    const double scale = std::max({1.0, std::abs(xy[i]), std::abs(yx[i])});
    if (std::abs(xy[i] - yx[i]) > tol * scale) return false;
  }
  return true;
}

Spectrum forward(const GridScalar& g) {
  Spectrum s(g.n);
  auto& d = s.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = g.v[i];
  Fft2d::get(g.n).forward(d.data());
  const double inv = 1.0 / (static_cast<double>(g.n) * g.n);
  for (auto& z : d) z *= inv;
  return s;
}

GridScalar inverse(const Spectrum& s) {
  std::vector<Complex> d = s.data();
  Fft2d::get(s.n()).backward(d.data());
  GridScalar g(s.n());
  for (std::size_t i = 0; i < d.size(); ++i) g.v[i] = d[i].real();
  return g;
}

void dealias(Spectrum& s) {
  const int n = s.n();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int kx = s.wavenumber(a), ky = s.wavenumber(b);
      if (3 * std::abs(kx) > n || 3 * std::abs(ky) > n) s.data()[static_cast<std::size_t>(a) * n + b] = 0.0;
    }
}

SpectralField::SpectralField(int grid_size, int k_max) : n_(grid_size), k_(k_max) {
  validate_grid(grid_size, k_max);
  const auto sz = static_cast<std::size_t>(side()) * side();
  comp_[0].assign(sz, Complex{});
  comp_[1].assign(sz, Complex{});
}

double SpectralField::max_divergence() const {
  double m = 0.0;
  for (int kx = -k_; kx <= k_; ++kx)
    for (int ky = -k_; ky <= k_; ++ky)
      m = std::max(m, std::abs(static_cast<double>(kx) * at(0, kx, ky) + static_cast<double>(ky) * at(1, kx, ky)));
  return m;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.n_ != n_ || o.k_ != k_) throw ValidationError("spectral fields have different shapes");
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < comp_[c].size(); ++i) comp_[c][i] += o.comp_[c][i];
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& c : comp_)
    for (auto& z : c) z *= a;
  return *this;
}

namespace {

// Inverse transform of two real fields given by their box spectra.
void inverse_pair(int n, int k, const std::vector<Complex>& a, const std::vector<Complex>& b,
                  std::vector<double>& ga, std::vector<double>& gb) {
  std::vector<Complex> z(static_cast<std::size_t>(n) * n);
  const int side = 2 * k + 1;
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky) {
      const std::size_t bi = static_cast<std::size_t>(kx + k) * side + (ky + k);
      z[slot(n, kx, ky)] = a[bi] + Complex(0.0, 1.0) * b[bi];
    }
  Fft2d::get(n).backward(z.data());
  ga.resize(z.size());
  gb.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    ga[i] = z[i].real();
    gb[i] = z[i].imag();
  }
}

std::vector<Complex> derivative(const SpectralField& u, int comp, int dir) {
  const int k = u.k_max();
  std::vector<Complex> out(u.component(comp).size());
  const int side = u.side();
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky) {
      const double kd = dir == 0 ? kx : ky;
      out[static_cast<std::size_t>(kx + k) * side + (ky + k)] = Complex(0.0, kd) * u.at(comp, kx, ky);
    }
  return out;
}

}  // namespace

GridVector to_grid(const SpectralField& u) {
  GridVector g(u.grid_size());
  inverse_pair(u.grid_size(), u.k_max(), u.component(0), u.component(1), g.x, g.y);
  return g;
}

SpectralField from_grid(const GridVector& g, int k_max) {
  SpectralField u(g.n, k_max);
  const int n = g.n;
  std::vector<Complex> z(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = Complex(g.x[i], g.y[i]);
  Fft2d::get(n).forward(z.data());
  const double inv = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : z) v *= inv;
  for (int kx = -k_max; kx <= k_max; ++kx)
    for (int ky = -k_max; ky <= k_max; ++ky) unpack_pair(z, n, kx, ky, u.at(0, kx, ky), u.at(1, kx, ky));
  return u;
}

SymTensorField gradient(const SpectralField& u) {
  SymTensorField t(u.grid_size());
  const int n = u.grid_size(), k = u.k_max();
  inverse_pair(n, k, derivative(u, 0, 0), derivative(u, 0, 1), t.xx, t.xy);
  inverse_pair(n, k, derivative(u, 1, 0), derivative(u, 1, 1), t.yx, t.yy);
  return t;
}

SymTensorField sym_gradient(const SpectralField& u) {
  SymTensorField g = gradient(u);
  for (std::size_t i = 0; i < g.xy.size(); ++i) {
    const double s = 0.5 * (g.xy[i] + g.yx[i]);
    g.xy[i] = s;
    g.yx[i] = s;
  }
  return g;
}

SpectralField leray_project(const SpectralField& u) {
  SpectralField w = u;
  const int k = u.k_max();
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky) {
      const int k2 = kx * kx + ky * ky;
      if (k2 == 0) continue;
      const Complex d = (static_cast<double>(kx) * u.at(0, kx, ky) + static_cast<double>(ky) * u.at(1, kx, ky)) /
                        static_cast<double>(k2);
      w.at(0, kx, ky) -= static_cast<double>(kx) * d;
      w.at(1, kx, ky) -= static_cast<double>(ky) * d;
    }
  return w;
}

SpectralField leray_project(const GridVector& g, int k_max) { return leray_project(from_grid(g, k_max)); }

void dealias(SpectralField& u) {
  const int n = u.grid_size(), k = u.k_max();
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky)
      if (3 * std::abs(kx) > n || 3 * std::abs(ky) > n) {
        u.at(0, kx, ky) = 0.0;
        u.at(1, kx, ky) = 0.0;
      }
}

double pow_abs(double x, double p) {
  x = std::abs(x);
  if (p == 2.0) return x * x;
  if (p == 1.0) return x;
  if (p == 3.0) return x * x * x;
  if (p == 4.0) return (x * x) * (x * x);
  if (x == 0.0) return 0.0;
  return std::pow(x, p);
}

double grid_integral(std::span<const double> values, int n) {
  double s = 0.0;
  for (double v : values) s += v;
  const double h = 2.0 * kPi / n;
  return s * h * h;
}

double lp_power(const GridVector& g, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) s += pow_abs(std::hypot(g.x[i], g.y[i]), p);
  const double h = 2.0 * kPi / g.n;
  return s * h * h;
}

double lp_power(const SymTensorField& t, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < t.xx.size(); ++i)
    s += pow_abs(std::sqrt(t.xx[i] * t.xx[i] + t.xy[i] * t.xy[i] + t.yx[i] * t.yx[i] + t.yy[i] * t.yy[i]), p);
  const double h = 2.0 * kPi / t.n;
  return s * h * h;
}

double lp_power(const GridScalar& g, double p) {
  double s = 0.0;
  for (double v : g.v) s += pow_abs(v, p);
  const double h = 2.0 * kPi / g.n;
  return s * h * h;
}

double inner(const SpectralField& a, const SpectralField& b) {
  if (a.k_max() != b.k_max()) throw ValidationError("inner product of fields with different truncation");
  double s = 0.0;
  for (int c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < a.component(c).size(); ++i)
      s += (a.component(c)[i] * std::conj(b.component(c)[i])).real();
  return kDomainArea * s;
}

NormReport norms(const SpectralField& u, double p, double q) {
  NormReport r;
  const int k = u.k_max();
  double s0 = 0.0, s1 = 0.0;
  for (int kx = -k; kx <= k; ++kx)
    for (int ky = -k; ky <= k; ++ky) {
      const double m = std::norm(u.at(0, kx, ky)) + std::norm(u.at(1, kx, ky));
      s0 += m;
      s1 += (kx * kx + ky * ky) * m;
    }
  r.l2 = std::sqrt(kDomainArea * s0);
  r.grad_l2 = std::sqrt(kDomainArea * s1);
  r.lp_grad = std::pow(lp_power(gradient(u), p), 1.0 / p);
  r.lq = std::pow(lp_power(to_grid(u), q), 1.0 / q);
  return r;
}

SpectralField random_solenoidal(int grid_size, int k_max, double decay, std::mt19937_64& rng) {
  SpectralField u(grid_size, k_max);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (const auto& kv : canonical_modes(k_max)) {
    // Half-plane representatives; the conjugate partner is set alongside.
    if (!(kv.ky > 0 || (kv.ky == 0 && kv.kx > 0))) continue;
    const double kn = std::sqrt(static_cast<double>(kv.norm2()));
    const double amp = std::pow(1.0 + kv.norm2(), -0.5 * decay);
    const Complex a(amp * nd(rng), amp * nd(rng));
    const double ex = -kv.ky / kn, ey = kv.kx / kn;
    u.at(0, kv.kx, kv.ky) = a * ex;
    u.at(1, kv.kx, kv.ky) = a * ey;
    u.at(0, -kv.kx, -kv.ky) = std::conj(a) * ex;
    u.at(1, -kv.kx, -kv.ky) = std::conj(a) * ey;
  }
  return u;
}

}  // namespace nsv
