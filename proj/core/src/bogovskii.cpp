#include "nsv/bogovskii.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nsv/error.hpp"

namespace nsv {

namespace {

constexpr double kPiB = std::numbers::pi;
constexpr double kCx = 0.5, kCy = 0.5, kRadius = 0.25;

struct Rule {
  std::vector<double> x, w;  // on [-1, 1]
};

Rule gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPiB * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

double bump_profile(double s) {  // s = |x - c| / R
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

double bump_normaliser() {
  static const double c = [] {
    // int_ball profile = 2 pi R^2 int_0^1 profile(s) s ds, composite Gauss-Legendre.
    const Rule g = gauss_legendre(20);
    double acc = 0.0;
    const int panels = 64;
    for (int p = 0; p < panels; ++p) {
      const double a = double(p) / panels, b = double(p + 1) / panels;
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double s = 0.5 * (a + b) + 0.5 * (b - a) * g.x[i];
        acc += 0.5 * (b - a) * g.w[i] * bump_profile(s) * s;
      }
    }
    return 1.0 / (2.0 * kPiB * kRadius * kRadius * acc);
  }();
  return c;
}

// Distance from (x, y) to the square boundary along direction (dx, dy).
double exit_distance(double x, double y, double dx, double dy) {
  double t = std::numeric_limits<double>::infinity();
  if (dx > 0.0) t = std::min(t, (1.0 - x) / dx);
  if (dx < 0.0) t = std::min(t, -x / dx);
  if (dy > 0.0) t = std::min(t, (1.0 - y) / dy);
  if (dy < 0.0) t = std::min(t, -y / dy);
  return std::max(0.0, t);
}

struct Quadrature {
  int n_theta;
  Rule chord{gauss_legendre(32)};
  Rule radial{gauss_legendre(32)};
  Rule angle;
  explicit Quadrature(int m) : n_theta(std::max(64, 2 * m)), angle(gauss_legendre(n_theta)) {}
};

// Accumulates w at one node for every xi in the batch.
void solve_node(double x, double y, const Quadrature& q, const std::vector<std::function<double(double, double)>>& xis,
                std::vector<double>& wx, std::vector<double>& wy) {
  const std::size_t nb = xis.size();
  std::fill(wx.begin(), wx.end(), 0.0);
  std::fill(wy.begin(), wy.end(), 0.0);
  const double dx = x - kCx, dy = y - kCy;
  const double d = std::hypot(dx, dy);
  const bool inside = d < kRadius;
  double th0, th1;
  if (inside) {
    th0 = 0.0;
    th1 = 2.0 * kPiB;
  } else {
    const double c = std::atan2(-dy, -dx), beta = std::asin(kRadius / d);
    th0 = c - beta;
    th1 = c + beta;
  }
  const double norm = bump_normaliser();
  std::vector<double> i0(nb), i1(nb);
  const int nt = inside ? q.n_theta : static_cast<int>(q.angle.x.size());
  for (int it = 0; it < nt; ++it) {
    double th, wt;
    if (inside) {
      th = (it + 0.5) * (th1 - th0) / nt;  // periodic trapezoid
      wt = (th1 - th0) / nt;
    } else {
      th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * q.angle.x[it];
      wt = 0.5 * (th1 - th0) * q.angle.w[it];
    }
    const double ex = std::cos(th), ey = std::sin(th);
    // Chord of the ray x + s e through the ball.
    const double b = dx * ex + dy * ey;
    const double disc = b * b - (d * d - kRadius * kRadius);
    if (disc <= 0.0) continue;
    const double sq = std::sqrt(disc);
    const double s_lo = std::max(0.0, -b - sq), s_hi = -b + sq;
    if (s_hi <= s_lo) continue;
    double om0 = 0.0, om1 = 0.0;
    for (std::size_t k = 0; k < q.chord.x.size(); ++k) {
      const double s = 0.5 * (s_lo + s_hi) + 0.5 * (s_hi - s_lo) * q.chord.x[k];
      const double px = dx + s * ex, py = dy + s * ey;
      const double v = 0.5 * (s_hi - s_lo) * q.chord.w[k] * norm * bump_profile(std::hypot(px, py) / kRadius);
      om0 += v;
      om1 += v * s;
    }
    if (om0 == 0.0) continue;
    const double rho = exit_distance(x, y, -ex, -ey);
    if (rho <= 0.0) continue;
    std::fill(i0.begin(), i0.end(), 0.0);
    std::fill(i1.begin(), i1.end(), 0.0);
    for (std::size_t k = 0; k < q.radial.x.size(); ++k) {
      const double r = 0.5 * rho * (1.0 + q.radial.x[k]);
      const double wr = 0.5 * rho * q.radial.w[k];
      const double yx = x - r * ex, yy = y - r * ey;
      for (std::size_t bi = 0; bi < nb; ++bi) {
        const double v = wr * xis[bi](yx, yy);
        i0[bi] += v;
        i1[bi] += v * r;
      }
    }
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const double a = wt * (om0 * i1[bi] + om1 * i0[bi]);
      wx[bi] += a * ex;
      wy[bi] += a * ey;
    }
  }
}

}  // namespace

double bogovskii_bump(double x, double y) {
  return bump_normaliser() * bump_profile(std::hypot(x - kCx, y - kCy) / kRadius);
}

void square_moments(const std::function<double(double, double)>& xi, double& mean, double& l1) {
  const Rule g = gauss_legendre(16);
  const int panels = 8;
  mean = 0.0;
  l1 = 0.0;
  for (int pa = 0; pa < panels; ++pa)
    for (int pb = 0; pb < panels; ++pb)
      for (std::size_t i = 0; i < g.x.size(); ++i)
        for (std::size_t j = 0; j < g.x.size(); ++j) {
          const double x = (pa + 0.5 * (1.0 + g.x[i])) / panels;
          const double y = (pb + 0.5 * (1.0 + g.x[j])) / panels;
          const double w = 0.25 * g.w[i] * g.w[j] / (panels * panels);
          const double v = xi(x, y);
          mean += w * v;
          l1 += w * std::abs(v);
        }
}

std::vector<SquareField> bogovskii_solve_batch(const std::vector<std::function<double(double, double)>>& xis,
                                               int resolution) {
  if (resolution < 2) throw ValidationError("bogovskii_solve: resolution must be at least 2");
  for (std::size_t b = 0; b < xis.size(); ++b) {
    double m, l1;
    square_moments(xis[b], m, l1);
    if (std::abs(m) > 1e-10 * l1 || (l1 == 0.0 && m != 0.0))
      throw ValidationError("bogovskii_solve: datum " + std::to_string(b) + " has nonzero mean " + std::to_string(m));
  }
  const int M = resolution;
  const Quadrature q(M);
  std::vector<SquareField> out(xis.size());
  for (auto& f : out) {
    f.m = M;
    f.x.assign(static_cast<std::size_t>(M + 1) * (M + 1), 0.0);
    f.y.assign(f.x.size(), 0.0);
  }
  std::vector<double> wx(xis.size()), wy(xis.size());
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= M; ++j) {
      solve_node(double(i) / M, double(j) / M, q, xis, wx, wy);
      for (std::size_t b = 0; b < xis.size(); ++b) {
        out[b].ux(i, j) = wx[b];
        out[b].uy(i, j) = wy[b];
      }
    }
  return out;
}

SquareField bogovskii_solve(const BogovskiiProblem& prob) {
  return bogovskii_solve_batch({prob.xi}, prob.resolution).front();
}

BogovskiiDiagnostics bogovskii_diagnostics(const SquareField& w, const std::function<double(double, double)>& xi) {
  BogovskiiDiagnostics d;
  const int M = w.m;
  const double h = 1.0 / M;
  double res = 0.0, grad = 0.0, xl2 = 0.0;
  for (int i = 1; i < M; ++i)
    for (int j = 1; j < M; ++j) {
      const double dxx = (w.ux(i + 1, j) - w.ux(i - 1, j)) / (2 * h);
      const double dyx = (w.ux(i, j + 1) - w.ux(i, j - 1)) / (2 * h);
      const double dxy = (w.uy(i + 1, j) - w.uy(i - 1, j)) / (2 * h);
      const double dyy = (w.uy(i, j + 1) - w.uy(i, j - 1)) / (2 * h);
      const double v = xi(i * h, j * h);
      res += (dxx + dyy - v) * (dxx + dyy - v);
      grad += dxx * dxx + dyx * dyx + dxy * dxy + dyy * dyy;
      xl2 += v * v;
    }
  d.divergence_residual = std::sqrt(res * h * h);
  d.grad_l2 = std::sqrt(grad * h * h);
  d.xi_l2 = std::sqrt(xl2 * h * h);
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= M; ++j)
      if (i == 0 || j == 0 || i == M || j == M)
        d.boundary_max = std::max({d.boundary_max, std::abs(w.ux(i, j)), std::abs(w.uy(i, j))});
  return d;
}

}  // namespace nsv
