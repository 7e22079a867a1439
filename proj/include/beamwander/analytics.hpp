#pragma once

#include <cmath>
#include <numbers>
#include <string_view>

#include "beamwander/errors.hpp"
#include "beamwander/phase_screen.hpp"
#include "beamwander/quadrature.hpp"
#include "beamwander/special_functions.hpp"
#include "beamwander/spectra.hpp"

namespace beamwander {

inline constexpr double kSpeedOfLight = 299792458.0; ///< m/s, omega0 = c q0

struct GeometryParams {
  double z = 1e4; ///< propagation distance, m

  void validate() const {
    if (!(z > 0.0) || !std::isfinite(z))
      throw ParameterError("propagation distance z must be finite and > 0");
  }
};

inline double carrier_frequency(const SourceParams &src) { return kSpeedOfLight * src.q0; }

enum class WanderRegime { weak_analytic, asymptotic_short, asymptotic_long };

inline std::string_view to_string(WanderRegime r) {
  switch (r) {
  case WanderRegime::asymptotic_short:
    return "asymptotic-short";
  case WanderRegime::asymptotic_long:
    return "asymptotic-long";
  default:
    return "weak-analytic";
  }
}

struct WanderPrediction {
  double rw2 = 0.0; ///< m²
  WanderRegime regime = WanderRegime::weak_analytic;
  double i1 = 0.0;
  double a2 = 0.0;
};

/// I1(a2) = ∫_0^1 (x - 1)² (x² + a2)^(-1/6) dx.
///
/// With x = t³ the integrand becomes 3 t² (t³ - 1)² (t⁶ + a2)^(-1/6), which stays bounded
/// (by 3t) as a2 -> 0, so one adaptive rule covers the whole range including a2 = 0.
inline double i1_integral(double a2) {
  if (!(a2 >= 0.0) || !std::isfinite(a2))
    throw ParameterError("a2 must be finite and >= 0");
  auto f = [a2](double t) {
    const double t3 = t * t * t;
    const double base = a2 == 0.0 ? t : std::pow(t3 * t3 + a2, 1.0 / 6.0);
    if (base == 0.0)
      return 0.0;
    return 3.0 * t * t * (t3 - 1.0) * (t3 - 1.0) / base;
  };
  return integrate_or_throw(f, 0.0, 1.0, {1e-12, 1e-12, 2000}, {0.5});
}

/// a2 = (r0²/4 + l0'²) q0² r1² / z².
inline double i1_parameter(const SourceParams &src, const TurbulenceParams &turb,
                           const GeometryParams &geom) {
  const double lp = turb.reduced_inner_scale();
  const double r1 = src.r1();
  return (src.r0 * src.r0 / 4.0 + lp * lp) * src.q0 * src.q0 * r1 * r1 / (geom.z * geom.z);
}

/// Weak-turbulence wander <Rw²> = 0.066 pi² Gamma(1/6) Cn² z^(8/3) (q0 r1)^(1/3) I1(a2).
/// Outer scale does not enter (infinite-L0 limit). Regime tags mark a2 beyond 1e2 / below 1e-2.
inline WanderPrediction wander_variance_weak(const SourceParams &src, const TurbulenceParams &turb,
                                             const GeometryParams &geom) {
  src.validate();
  turb.validate();
  geom.validate();
  WanderPrediction p;
  p.a2 = i1_parameter(src, turb, geom);
  p.i1 = i1_integral(p.a2);
  p.regime = p.a2 > 1e2    ? WanderRegime::asymptotic_short
             : p.a2 < 1e-2 ? WanderRegime::asymptotic_long
                           : WanderRegime::weak_analytic;
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  p.rw2 = 0.066 * pi2 * gamma_function(1.0 / 6.0) * turb.cn2 * std::pow(geom.z, 8.0 / 3.0) *
          std::cbrt(src.q0 * src.r1()) * p.i1;
  return p;
}

/// 1.919 Cn² z³ (2 r0)^(-1/3).
inline double classic_wander(double cn2, double z, double r0) {
  if (!(cn2 >= 0.0) || !(z > 0.0) || !(r0 > 0.0))
    throw ParameterError("classic wander needs cn2 >= 0, z > 0, r0 > 0");
  return 1.919 * cn2 * z * z * z / std::cbrt(2.0 * r0);
}

/// T = 0.558 Cn² l0^(-1/3), with the inner scale l0 itself (not l0').
inline double broadening_rate(const TurbulenceParams &turb) {
  return 0.558 * turb.cn2 / std::cbrt(turb.inner_scale);
}

/// Rb² = (r0²/2) [1 + 4 z² / (q0² r0² r1²) + 8 z³ T / r0²]; z = 0 is allowed.
inline double beam_radius_squared(const SourceParams &src, const TurbulenceParams &turb,
                                  const GeometryParams &geom) {
  src.validate();
  turb.validate();
  if (!(geom.z >= 0.0) || !std::isfinite(geom.z))
    throw ParameterError("propagation distance z must be finite and >= 0");
  const double r0 = src.r0, r1 = src.r1(), z = geom.z, q0 = src.q0;
  return 0.5 * r0 * r0 *
         (1.0 + 4.0 * z * z / (q0 * q0 * r0 * r0 * r1 * r1) +
          8.0 * z * z * z * broadening_rate(turb) / (r0 * r0));
}

/// Turbulence broadening dRb² = 2.23 l0^(-1/3) Cn² z³.
inline double turbulence_broadening(const TurbulenceParams &turb, double z) {
  return 2.23 * turb.cn2 * z * z * z / std::cbrt(turb.inner_scale);
}

struct StrongTurbulenceCheck {
  bool holds = false;
  double margin = 0.0; ///< dRb² / (r0²/2 + 2 z²/(q0² r1²))
};

/// Dominance factor for "much greater than".
inline constexpr double kStrongDominance = 10.0;

inline StrongTurbulenceCheck strong_turbulence_condition(const SourceParams &src,
                                                         const TurbulenceParams &turb,
                                                         const GeometryParams &geom) {
  src.validate();
  turb.validate();
  geom.validate();
  const double r1 = src.r1();
  const double vacuum =
      0.5 * src.r0 * src.r0 + 2.0 * geom.z * geom.z / (src.q0 * src.q0 * r1 * r1);
  StrongTurbulenceCheck c;
  c.margin = turbulence_broadening(turb, geom.z) / vacuum;
  c.holds = c.margin > kStrongDominance;
  return c;
}

struct CrossCorrelationEstimate {
  double rw2 = 0.0;
  bool advisory_only = false; ///< set when the strong-turbulence condition fails
};

/// Cross-correlation wander (8/3)(r1²/r0²) z² / (q0² dRb²); only meaningful in strong turbulence.
inline CrossCorrelationEstimate cross_correlation_wander(const SourceParams &src,
                                                         const TurbulenceParams &turb,
                                                         const GeometryParams &geom) {
  const auto cond = strong_turbulence_condition(src, turb, geom);
  if (turb.cn2 == 0.0)
    throw ParameterError("cross-correlation wander is undefined for cn2 = 0");
  const double r1 = src.r1(), z = geom.z;
  CrossCorrelationEstimate e;
  e.rw2 = 8.0 / 3.0 * (r1 * r1) / (src.r0 * src.r0) * z * z /
          (src.q0 * src.q0 * turbulence_broadening(turb, z));
  e.advisory_only = !cond.holds;
  return e;
}

} // namespace beamwander
