#include "nsv/pressure.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "nsv/error.hpp"

namespace nsv {

using detail::Fft2d;

namespace {

std::vector<Complex> fft_of(const std::vector<double>& v, int n) {
  std::vector<Complex> z(v.begin(), v.end());
  Fft2d::get(n).forward(z.data());
  const double inv = 1.0 / (static_cast<double>(n) * n);
  for (auto& c : z) c *= inv;
  return z;
}

std::vector<double> ifft_real(std::vector<Complex> z, int n) {
  Fft2d::get(n).backward(z.data());
  std::vector<double> v(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = z[i].real();
  return v;
}

int wave(int s, int n) { return s <= n / 2 ? s : s - n; }

bool nyquist(int s, int n) { return 2 * s == n; }

// Lattice loop over (slot, kx, ky).
template <class F>
void for_modes(int n, F&& fn) {
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) fn(static_cast<std::size_t>(a) * n + b, a, b, wave(a, n), wave(b, n));
}

// pihat = k^T Hhat k / |k|^2 from the four component spectra.
std::vector<Complex> pressure_spectrum(const std::vector<Complex> h[4], int n) {
  std::vector<Complex> p(h[0].size());
  for_modes(n, [&](std::size_t s, int a, int b, int kx, int ky) {
    const int k2 = kx * kx + ky * ky;
    if (k2 == 0 || nyquist(a, n) || nyquist(b, n)) return;
    p[s] = (double(kx * kx) * h[0][s] + double(kx * ky) * (h[1][s] + h[2][s]) + double(ky * ky) * h[3][s]) /
           double(k2);
  });
  return p;
}

GridScalar as_grid(std::vector<double> v, int n) {
  GridScalar g;
  g.n = n;
  g.v = std::move(v);
  return g;
}

void spectra_of(const SymTensorField& H, std::vector<Complex> out[4]) {
  out[0] = fft_of(H.xx, H.n);
  out[1] = fft_of(H.xy, H.n);
  out[2] = fft_of(H.yx, H.n);
  out[3] = fft_of(H.yy, H.n);
}

}  // namespace

GridScalar recover_pressure(const SymTensorField& H) {
  std::vector<Complex> h[4];
  spectra_of(H, h);
  return as_grid(ifft_real(pressure_spectrum(h, H.n), H.n), H.n);
}

TensorSplit split_tensor(const SpectralField& u, const RheologyParams& params, const SpectralField* f,
                         bool convection) {
  const int n = u.grid_size();
  if (f && f->grid_size() != n) throw ValidationError("forcing grid does not match the velocity grid");
  const GridVector ug = to_grid(u);
  const SymTensorField D = sym_gradient(u);
  const SymTensorField A = power_law_stress(D, params);
  TensorSplit s{SymTensorField(n), SymTensorField(n)};
  const std::size_t np = ug.x.size();
  for (std::size_t i = 0; i < np; ++i) {
    s.H1.xx[i] = -params.nu * A.xx[i];
    s.H1.xy[i] = -params.nu * A.xy[i];
    s.H1.yx[i] = -params.nu * A.yx[i];
    s.H1.yy[i] = -params.nu * A.yy[i];
    if (convection) {
      s.H2.xx[i] = ug.x[i] * ug.x[i];
      s.H2.xy[i] = ug.x[i] * ug.y[i];
      s.H2.yx[i] = ug.y[i] * ug.x[i];
      s.H2.yy[i] = ug.y[i] * ug.y[i];
    }
  }
  // g = alpha a(u) - f, entering through grad Lap^{-1} g.
  GridVector g = params.alpha > 0.0 ? stabilizer(ug, params) : GridVector(n);
  const bool has_f = f != nullptr;
  if (!has_f && params.alpha == 0.0) return s;
  if (has_f) {
    const GridVector fg = to_grid(*f);
    for (std::size_t i = 0; i < np; ++i) {
      g.x[i] -= fg.x[i];
      g.y[i] -= fg.y[i];
    }
  }
  const auto gx = fft_of(g.x, n), gy = fft_of(g.y, n);
  std::vector<Complex> t[4];
  for (auto& v : t) v.assign(gx.size(), Complex{});
  const Complex I(0.0, 1.0);
  for_modes(n, [&](std::size_t sl, int a, int b, int kx, int ky) {
    const int k2 = kx * kx + ky * ky;
    if (k2 == 0 || nyquist(a, n) || nyquist(b, n)) return;
    const double inv = -1.0 / k2;
    t[0][sl] = I * double(kx) * inv * gx[sl];
    t[1][sl] = I * double(kx) * inv * gy[sl];
    t[2][sl] = I * double(ky) * inv * gx[sl];
    t[3][sl] = I * double(ky) * inv * gy[sl];
  });
  const auto txx = ifft_real(t[0], n), txy = ifft_real(t[1], n), tyx = ifft_real(t[2], n), tyy = ifft_real(t[3], n);
  for (std::size_t i = 0; i < np; ++i) {
    s.H2.xx[i] += txx[i];
    s.H2.xy[i] += txy[i];
    s.H2.yx[i] += tyx[i];
    s.H2.yy[i] += tyy[i];
  }
  return s;
}

double mean(const GridScalar& g) {
  double s = 0.0;
  for (double v : g.v) s += v;
  return g.v.empty() ? 0.0 : s / static_cast<double>(g.v.size());
}

double l2_norm(const GridScalar& g) { return std::sqrt(lp_power(g, 2.0)); }

double lp_norm(const GridScalar& g, double p) { return std::pow(lp_power(g, p), 1.0 / p); }

PressureParts decompose_pressure(const Problem& pb, const Trajectory& tr, const PressureOptions& opt) {
  const std::size_t steps = tr.ledger.size();
  if (tr.states.size() != steps + 1)
    throw ValidationError("decompose_pressure: trajectory must store every state (" + std::to_string(tr.states.size()) +
                          " states for " + std::to_string(steps) + " steps)");
  if (pb.noise.modes > 0 && tr.increments.size() != steps)
    throw ValidationError("decompose_pressure: noise history length " + std::to_string(tr.increments.size()) +
                          " does not match " + std::to_string(steps) + " steps");
  if (opt.slice_every < 1) throw ValidationError("decompose_pressure: slice_every must be positive");

  const int n = pb.basis.grid_size();
  const std::size_t np = static_cast<std::size_t>(n) * n;
  const double dt = pb.dt;
  const Complex I(0.0, 1.0);

  PressureParts parts;
  parts.p_conjugate = pb.params.p_conjugate();
  const double qc = pb.params.q / (pb.params.q - 1.0);
  parts.q0 = std::min(parts.p_conjugate, qc);

  std::vector<Complex> divH[2], Gsum[2];
  for (auto* a : {divH, Gsum})
    for (int c = 0; c < 2; ++c) a[c].assign(np, Complex{});
  std::vector<double> piH_int(np, 0.0);
  const SpectralField u0 = pb.basis.reconstruct(tr.states.front());
  const double kappa = pb.params.kappa;
  const double h = 2.0 * kPi / n;

  for (std::size_t m = 0; m <= steps; ++m) {
    const SpectralField u = pb.basis.reconstruct(tr.states[m]);
    const TensorSplit sp = split_tensor(u, pb.params, pb.forcing.at(static_cast<std::int64_t>(m)), pb.convection);
    std::vector<Complex> h1[4], h2[4];
    spectra_of(sp.H1, h1);
    spectra_of(sp.H2, h2);
    const auto p1 = ifft_real(pressure_spectrum(h1, n), n);
    const auto p2 = ifft_real(pressure_spectrum(h2, n), n);

    const bool slice = (m % static_cast<std::size_t>(opt.slice_every) == 0) || m == steps;
    if (slice) {
      parts.times.push_back(tr.times[m]);
      parts.pi1.push_back(as_grid(p1, n));
      parts.pi2.push_back(as_grid(p2, n));
      parts.pi_H_integral.push_back(as_grid(piH_int, n));

      std::vector<Complex> phi(np), pit(np), rg[2], gradpi[2];
      for (int c = 0; c < 2; ++c) {
        rg[c].assign(np, Complex{});
        gradpi[c].assign(np, Complex{});
      }
      for_modes(n, [&](std::size_t s, int a, int b, int kx, int ky) {
        Complex r[2] = {divH[0][s] - Gsum[0][s], divH[1][s] - Gsum[1][s]};
        if (u.in_box(kx, ky) && !nyquist(a, n) && !nyquist(b, n)) {
          const double mk = 1.0 + kappa * (kx * kx + ky * ky);
          r[0] += mk * (u.at(0, kx, ky) - u0.at(0, kx, ky));
          r[1] += mk * (u.at(1, kx, ky) - u0.at(1, kx, ky));
        }
        rg[0][s] = r[0];
        rg[1][s] = r[1];
        const int k2 = kx * kx + ky * ky;
        if (k2 == 0 || nyquist(a, n) || nyquist(b, n)) return;
        // pi_phi = -Lap^{-1} div G = -Lap Lap^{-2} div G
        const Complex divG = I * (double(kx) * Gsum[0][s] + double(ky) * Gsum[1][s]);
        const double lap = -double(k2), bilap_inv = 1.0 / (double(k2) * double(k2));
        phi[s] = -(lap * bilap_inv) * divG;
        const Complex divR = I * (double(kx) * r[0] + double(ky) * r[1]);
        pit[s] = divR / lap;
        gradpi[0][s] = I * double(kx) * pit[s];
        gradpi[1][s] = I * double(ky) * pit[s];
      });
      // Harmonic part: kernel of the Laplacian, which on the torus is the constant mode.
      std::vector<Complex> harm(np);
      harm[0] = pit[0];
      GridScalar pih = as_grid(ifft_real(harm, n), n);
      const double hm = mean(pih);
      for (auto& v : pih.v) v -= hm;

      GridScalar pig = as_grid(ifft_real(pit, n), n);
      GridScalar phig = as_grid(ifft_real(phi, n), n);
      GridScalar diff(n);
      for (std::size_t i = 0; i < np; ++i) diff.v[i] = pig.v[i] - pih.v[i] - phig.v[i] - piH_int[i];
      parts.residual.push_back(l2_norm(diff));

      // Tested momentum identity (R - grad pi, grad psi) for psi in {cos k.x, sin k.x}, |k| <= 2.
      const auto rx = ifft_real(rg[0], n), ry = ifft_real(rg[1], n);
      const auto gx = ifft_real(gradpi[0], n), gy = ifft_real(gradpi[1], n);
      double wmax = 0.0;
      for (int kx = -2; kx <= 2; ++kx)
        for (int ky = 0; ky <= 2; ++ky) {
          if (kx * kx + ky * ky == 0 || (ky == 0 && kx < 0)) continue;
          for (int kind = 0; kind < 2; ++kind) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
              for (int l = 0; l < n; ++l) {
                const double ph = kx * i * h + ky * l * h;
                const double d = kind == 0 ? -std::sin(ph) : std::cos(ph);
                const std::size_t idx = static_cast<std::size_t>(i) * n + l;
                acc += ((rx[idx] - gx[idx]) * kx + (ry[idx] - gy[idx]) * ky) * d;
              }
            wmax = std::max(wmax, std::abs(acc * h * h));
          }
        }
      parts.weak_residual.push_back(wmax);

      parts.pi.push_back(std::move(pig));
      parts.pi_phi.push_back(std::move(phig));
      parts.pi_h.push_back(std::move(pih));
    }
    if (m == steps) break;

    // Accumulate over [t_m, t_{m+1}).
    for (std::size_t i = 0; i < np; ++i) piH_int[i] += dt * (p1[i] + p2[i]);
    SymTensorField H(n);
    for (std::size_t i = 0; i < np; ++i) {
      H.xx[i] = sp.H1.xx[i] + sp.H2.xx[i];
      H.xy[i] = sp.H1.xy[i] + sp.H2.xy[i];
      H.yx[i] = sp.H1.yx[i] + sp.H2.yx[i];
      H.yy[i] = sp.H1.yy[i] + sp.H2.yy[i];
    }
    std::vector<Complex> hs[4];
    spectra_of(H, hs);
    for_modes(n, [&](std::size_t s, int, int, int kx, int ky) {
      divH[0][s] += dt * (I * (double(kx) * hs[0][s] + double(ky) * hs[1][s]));
      divH[1][s] += dt * (I * (double(kx) * hs[2][s] + double(ky) * hs[3][s]));
    });
    if (pb.noise.active()) {
      const auto& inc = tr.increments[m];
      double S = 0.0;
      for (int k = 1; k <= pb.noise.modes; ++k)
        S += pb.noise.weight(k) * opt.increment_scale * inc.dB[static_cast<std::size_t>(k - 1)];
      const GridVector ug = to_grid(u);
      std::vector<double> gxv(np), gyv(np);
      for (std::size_t i = 0; i < np; ++i) {
        double hx, hy;
        pb.noise.shape(ug.x[i], ug.y[i], hx, hy);
        gxv[i] = S * hx;
        gyv[i] = S * hy;
      }
      const auto gxs = fft_of(gxv, n), gys = fft_of(gyv, n);
      for (std::size_t s = 0; s < np; ++s) {
        Gsum[0][s] += gxs[s];
        Gsum[1][s] += gys[s];
      }
    }
  }
  return parts;
}

PressureStability pressure_stability(const Problem& pb, const Trajectory& tr) {
  const std::size_t steps = tr.ledger.size();
  if (tr.states.size() != steps + 1) throw ValidationError("pressure_stability: trajectory must store every state");
  PressureStability st;
  st.r = std::min(2.0, pb.params.p_conjugate());
  for (std::size_t m = 0; m < steps; ++m) {
    const SpectralField u = pb.basis.reconstruct(tr.states[m]);
    const TensorSplit sp = split_tensor(u, pb.params, pb.forcing.at(static_cast<std::int64_t>(m)), pb.convection);
    SymTensorField H(sp.H1.n);
    for (std::size_t i = 0; i < H.xx.size(); ++i) {
      H.xx[i] = sp.H1.xx[i] + sp.H2.xx[i];
      H.xy[i] = sp.H1.xy[i] + sp.H2.xy[i];
      H.yx[i] = sp.H1.yx[i] + sp.H2.yx[i];
      H.yy[i] = sp.H1.yy[i] + sp.H2.yy[i];
    }
    st.pressure_integral += pb.dt * lp_power(recover_pressure(H), st.r);
    st.tensor_integral += pb.dt * lp_power(H, st.r);
  }
  return st;
}

}  // namespace nsv
