#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "beamwander/errors.hpp"

namespace beamwander {

/// Square transverse sampling lattice, n x n points at pitch dx.
///
/// Point (row j, column i) sits at x = (i - n/2) dx, y = (j - n/2) dx, so the optical
/// axis passes through index (n/2, n/2).
struct SimGrid {
  std::size_t n = 256;
  double dx = 1e-3; ///< m

  double window() const { return static_cast<double>(n) * dx; }
  double coord(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(n / 2)) * dx;
  }
  /// Angular frequency of FFT bin i (standard wrap-around order), rad/m.
  double frequency(std::size_t i) const {
    const auto k = static_cast<double>(i < n / 2 ? static_cast<long>(i)
                                                 : static_cast<long>(i) - static_cast<long>(n));
    return 2.0 * std::numbers::pi * k / window();
  }
  double frequency_step() const { return 2.0 * std::numbers::pi / window(); }

  void validate() const {
    if (n < 64 || (n & (n - 1)) != 0)
      throw ParameterError("grid n must be a power of two >= 64");
    if (!(dx > 0.0) || !std::isfinite(dx))
      throw ParameterError("grid pitch dx must be > 0");
  }

  static SimGrid from_window(std::size_t n, double window) {
    return {n, window / static_cast<double>(n)};
  }

  friend bool operator==(const SimGrid &, const SimGrid &) = default;
};

/// Dense row-major n x n array.
template <class T> class Field2D {
public:
  Field2D() = default;
  explicit Field2D(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  T &operator()(std::size_t row, std::size_t col) { return data_[row * n_ + col]; }
  const T &operator()(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Field2D &, const Field2D &) = default;

private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

using RealField = Field2D<double>;
using ComplexArray = Field2D<std::complex<double>>;

} // namespace beamwander
