#pragma once

// Fourier representation of velocity fields on the periodic box [0,2pi)^2.
//
// Convention: u(x) = sum_k uhat(k) exp(i k.x).  Grids are N x N with
// x_i = 2 pi i / N, stored row-major with the x index outermost.

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace nsv {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDomainArea = 4.0 * kPi * kPi;

struct Wavevector {
  int kx = 0;
  int ky = 0;
  int norm2() const { return kx * kx + ky * ky; }
  friend bool operator==(const Wavevector&, const Wavevector&) = default;
};

// All k with |kx|,|ky| <= k_max, sorted by (|k|^2, kx, ky).
std::vector<Wavevector> canonical_modes(int k_max);

bool is_power_of_two(int n);
// Throws ConfigError unless N is a power of two with N >= 2 k_max + 2.
void validate_grid(int grid_size, int k_max);

struct GridScalar {
  int n = 0;
  std::vector<double> v;
  GridScalar() = default;
  explicit GridScalar(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_, 0.0) {}
  double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j]; }
};

struct GridVector {
  int n = 0;
  std::vector<double> x, y;
  GridVector() = default;
  explicit GridVector(int n_)
      : n(n_), x(static_cast<std::size_t>(n_) * n_, 0.0), y(static_cast<std::size_t>(n_) * n_, 0.0) {}
};

struct SymTensorField {
  int n = 0;
  std::vector<double> xx, xy, yx, yy;
  SymTensorField() = default;
  explicit SymTensorField(int n_);
  bool is_symmetric(double tol = 0.0) const;
};

// Scalar on the full N x N DFT lattice (FFT storage order, negative k wrapped).
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(int n) : n_(n), data_(static_cast<std::size_t>(n) * n) {}
  int n() const { return n_; }
  Complex& operator()(int kx, int ky) { return data_[index(kx, ky)]; }
  const Complex& operator()(int kx, int ky) const { return data_[index(kx, ky)]; }
  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }
  // Signed wavenumber stored at lattice slot s.
  int wavenumber(int s) const { return s <= n_ / 2 ? s : s - n_; }

 private:
  std::size_t index(int kx, int ky) const {
    const int a = ((kx % n_) + n_) % n_;
    const int b = ((ky % n_) + n_) % n_;
    return static_cast<std::size_t>(a) * n_ + b;
  }
  int n_ = 0;
  std::vector<Complex> data_;
};

Spectrum forward(const GridScalar& g);
GridScalar inverse(const Spectrum& s);
// Zeroes every mode with 3|k_i| > N for either component (2/3 rule).
void dealias(Spectrum& s);

// Two-component field truncated to the box |kx|,|ky| <= k_max, evaluated on an N-grid.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int grid_size, int k_max);

  int grid_size() const { return n_; }
  int k_max() const { return k_; }
  int side() const { return 2 * k_ + 1; }
  bool in_box(int kx, int ky) const { return kx >= -k_ && kx <= k_ && ky >= -k_ && ky <= k_; }

  Complex& at(int comp, int kx, int ky) { return comp_[comp][index(kx, ky)]; }
  const Complex& at(int comp, int kx, int ky) const { return comp_[comp][index(kx, ky)]; }
  std::vector<Complex>& component(int comp) { return comp_[comp]; }
  const std::vector<Complex>& component(int comp) const { return comp_[comp]; }

  // max_k |k . uhat(k)|
  double max_divergence() const;
  bool divergence_free(double tol = 1e-12) const { return max_divergence() <= tol; }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator*=(double a);

 private:
  std::size_t index(int kx, int ky) const {
    return static_cast<std::size_t>(kx + k_) * side() + (ky + k_);
  }
  int n_ = 0;
  int k_ = 0;
  std::vector<Complex> comp_[2];
};

GridVector to_grid(const SpectralField& u);
// Box-truncated coefficients of a real grid field.
SpectralField from_grid(const GridVector& g, int k_max);
SymTensorField sym_gradient(const SpectralField& u);
// Full gradient, component (i,j) = d_j u_i stored as xx=d_x u_x, xy=d_y u_x, yx=d_x u_y, yy=d_y u_y.
SymTensorField gradient(const SpectralField& u);
SpectralField leray_project(const SpectralField& u);
SpectralField leray_project(const GridVector& g, int k_max);
void dealias(SpectralField& u);

struct NormReport {
  double l2 = 0.0;       // ||u||_2
  double grad_l2 = 0.0;  // ||grad u||_2
  double lp_grad = 0.0;  // ||grad u||_p
  double lq = 0.0;       // ||u||_q
};

// L2 norms are exact (Parseval); Lp/Lq norms use the rectangle rule on the N-grid.
NormReport norms(const SpectralField& u, double p, double q);
double inner(const SpectralField& a, const SpectralField& b);

double grid_integral(std::span<const double> values, int n);
// sum over the grid of |v|^p h^2, with |v| the pointwise Euclidean/Frobenius norm.
double lp_power(const GridVector& g, double p);
double lp_power(const SymTensorField& t, double p);
double lp_power(const GridScalar& g, double p);

// x^p with exact shortcuts for small integer exponents.
double pow_abs(double x, double p);

// Random real divergence-free field with |uhat(k)| ~ (1+|k|^2)^(-decay/2), zero mean.
SpectralField random_solenoidal(int grid_size, int k_max, double decay, std::mt19937_64& rng);

}  // namespace nsv
