#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "beamwander/errors.hpp"

namespace beamwander {

namespace detail {

struct FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution through fftw_execute_dft is. Plans are
// made once per size, in place and unaligned, and live for the whole process.
inline FftPlans plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, FftPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end())
    return it->second;
  std::vector<std::complex<double>> scratch(n * n);
  auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  FftPlans p;
  p.forward = fftw_plan_dft_2d(ni, ni, buf, buf, FFTW_FORWARD, flags);
  p.backward = fftw_plan_dft_2d(ni, ni, buf, buf, FFTW_BACKWARD, flags);
  cache.emplace(n, p);
  return p;
}

} // namespace detail

/// In-place 2-D complex FFT on an n x n row-major array.
///
/// forward:  U(k) = Σ u(x) e^{-i k x};  inverse: u(x) = n⁻² Σ U(k) e^{+i k x}.
/// `inverse_unnormalized` skips the n⁻² factor (used for spectral synthesis).
class Fft2d {
public:
  explicit Fft2d(std::size_t n) : n_(n), plans_(detail::plans_for(n)) {}

  std::size_t size() const { return n_; }

  void forward(std::span<std::complex<double>> data) const {
    check(data);
    fftw_execute_dft(plans_.forward, raw(data), raw(data));
  }

  void inverse(std::span<std::complex<double>> data) const {
    inverse_unnormalized(data);
    const double scale = 1.0 / static_cast<double>(n_ * n_);
    for (auto &v : data)
      v *= scale;
  }

  void inverse_unnormalized(std::span<std::complex<double>> data) const {
    check(data);
    fftw_execute_dft(plans_.backward, raw(data), raw(data));
  }

private:
  void check(std::span<std::complex<double>> data) const {
    if (data.size() != n_ * n_)
      throw InputMismatchError("FFT buffer does not match plan size");
  }
  static fftw_complex *raw(std::span<std::complex<double>> d) {
    return reinterpret_cast<fftw_complex *>(d.data());
  }

  std::size_t n_;
  detail::FftPlans plans_;
};

} // namespace beamwander
