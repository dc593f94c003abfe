#pragma once

#include <complex>
#include <vector>

namespace nsv::detail {

using Complex = std::complex<double>;

// In-place unnormalised 2D complex transforms on an N x N row-major array.
// Plans are cached per N; execution is safe from concurrent threads.
class Fft2d {
 public:
  static const Fft2d& get(int n);

  int n() const { return n_; }
  // out[k] = sum_x in[x] exp(-i k.x)
  void forward(Complex* data) const;
  // out[x] = sum_k in[k] exp(+i k.x)
  void backward(Complex* data) const;

  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  ~Fft2d();

 private:
  explicit Fft2d(int n);
  int n_;
  void* fwd_;
  void* bwd_;
};

// Split Z = FFT(a + i b) of two real fields into ahat(k), bhat(k).
inline void unpack_pair(const std::vector<Complex>& z, int n, int kx, int ky, Complex& a, Complex& b) {
  const int i = ((kx % n) + n) % n, j = ((ky % n) + n) % n;
  const int im = ((-kx % n) + n) % n, jm = ((-ky % n) + n) % n;
  const Complex zk = z[static_cast<std::size_t>(i) * n + j];
  const Complex zm = std::conj(z[static_cast<std::size_t>(im) * n + jm]);
  a = 0.5 * (zk + zm);
  b = Complex(0.0, -0.5) * (zk - zm);
}

inline std::size_t slot(int n, int kx, int ky) {
  const int i = ((kx % n) + n) % n, j = ((ky % n) + n) % n;
  return static_cast<std::size_t>(i) * n + j;
}

}  // namespace nsv::detail
