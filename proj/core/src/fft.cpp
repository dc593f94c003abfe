#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace nsv::detail {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2d::Fft2d(int n) : n_(n) {
  // Planner calls are not thread-safe; callers hold plan_mutex().
  std::vector<Complex> scratch(static_cast<std::size_t>(n) * n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_2d(n, n, p, p, FFTW_FORWARD, flags);
  bwd_ = fftw_plan_dft_2d(n, n, p, p, FFTW_BACKWARD, flags);
}

// Only reached from static destruction at exit.
Fft2d::~Fft2d() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

const Fft2d& Fft2d::get(int n) {
  static std::map<int, std::unique_ptr<Fft2d>> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::unique_ptr<Fft2d>(new Fft2d(n))).first;
  return *it->second;
}

void Fft2d::forward(Complex* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft2d::backward(Complex* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

}  // namespace nsv::detail
