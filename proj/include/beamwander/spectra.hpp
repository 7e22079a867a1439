#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "beamwander/errors.hpp"
#include "beamwander/quadrature.hpp"

namespace beamwander {

/// Refractive-index turbulence: structure constant and the two eddy scales.
struct TurbulenceParams {
  double cn2 = 0.0;           ///< m^(-2/3)
  double inner_scale = 0.0;   ///< l0, m
  double outer_scale = 100.0; ///< L0, m

  /// l0' = l0 / (2 pi); the Gaussian cutoff reads exp(-g^2 l0'^2).
  double reduced_inner_scale() const { return inner_scale / (2.0 * std::numbers::pi); }

  static TurbulenceParams from_reduced_inner_scale(double cn2, double l0_reduced,
                                                   double outer_scale) {
    return {cn2, 2.0 * std::numbers::pi * l0_reduced, outer_scale};
  }

  void validate() const {
    if (!(cn2 >= 0.0) || !std::isfinite(cn2))
      throw ParameterError("cn2 must be finite and >= 0");
    if (!(inner_scale > 0.0))
      throw ParameterError("inner scale l0 must be > 0");
    if (!(outer_scale > inner_scale) || !std::isfinite(outer_scale))
      throw ParameterError("outer scale L0 must be finite and exceed l0");
  }
};

inline constexpr double kVonKarmanExponent = 11.0 / 6.0;

namespace detail {

inline double von_karman_unchecked(double g, const TurbulenceParams &p, double exponent) {
  const double cut = g * p.reduced_inner_scale();
  const double L = p.outer_scale;
  return 0.033 * p.cn2 * std::exp(-cut * cut) / std::pow(g * g + 1.0 / (L * L), exponent);
}

} // namespace detail

/// von Karman refractive-index spectrum psi(g), 3-D, in the ∫d³g convention:
/// psi(g) = 0.033 C_n² exp[-(g l0 / 2pi)²] / (g² + L0⁻²)^(11/6).
inline double von_karman_psd(double g, const TurbulenceParams &params) {
  params.validate();
  if (!(g >= 0.0))
    throw ParameterError("spatial frequency must be >= 0");
  return detail::von_karman_unchecked(g, params, kVonKarmanExponent);
}

/// 2-D phase spectrum of a thin layer of thickness dz: 2 pi q0² dz psi(kappa).
/// Phase covariance is ∫d²kappa e^{i kappa.rho} of this density.
inline double thin_layer_phase_psd(double kappa, const TurbulenceParams &params, double dz,
                                   double q0, double exponent = kVonKarmanExponent) {
  return 2.0 * std::numbers::pi * q0 * q0 * dz *
         detail::von_karman_unchecked(kappa, params, exponent);
}

/// Phase structure function D(dr) of one thin layer.
///
/// D(dr) = 4 pi ∫_0^∞ kappa Phi(kappa) [1 - J0(kappa dr)] dkappa, with Phi the thin-layer
/// phase spectrum above. The integral is taken over s = ln(kappa) with adaptive
/// Gauss-Kronrod; the range spans 1e-4 of the smaller of 1/L0, 1/dr up to 9/l0', where
/// the Gaussian cutoff is below e^-81.
inline double theoretical_phase_structure_function(double dr, const TurbulenceParams &params,
                                                   double dz, double q0, double rel_tol = 1e-9) {
  params.validate();
  if (!(dr > 0.0) || !(dz > 0.0) || !(q0 > 0.0))
    throw ParameterError("structure function needs dr > 0, dz > 0, q0 > 0");
  if (params.cn2 == 0.0)
    return 0.0;
  const double lp = params.reduced_inner_scale();
  const double s_lo = std::log(1e-4 * std::min(1.0 / params.outer_scale, 1.0 / dr));
  const double s_hi = std::log(9.0 / lp);
  auto integrand = [&](double s) {
    const double k = std::exp(s);
    const double x = k * dr;
    const double x2 = x * x;
    // Series below x = 0.1 avoids the cancellation in 1 - J0.
    const double bessel = x < 0.1 ? x2 / 4.0 * (1.0 - x2 / 16.0 * (1.0 - x2 / 36.0))
                                  : 1.0 - std::cyl_bessel_j(0.0, x);
    return 4.0 * std::numbers::pi * k * k * thin_layer_phase_psd(k, params, dz, q0) * bessel;
  };
  std::vector<double> breaks;
  for (double k : {1.0 / params.outer_scale, 1.0 / dr, 1.0 / lp}) {
    const double s = std::log(k);
    if (s > s_lo && s < s_hi)
      breaks.push_back(s);
  }
  std::sort(breaks.begin(), breaks.end());
  QuadratureOptions opts{0.0, rel_tol, 4000};
  return integrate_or_throw(integrand, s_lo, s_hi, opts, breaks);
}

} // namespace beamwander
