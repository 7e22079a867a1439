#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "beamwander/errors.hpp"
#include "beamwander/phase_screen.hpp"
#include "beamwander/propagation.hpp"
#include "beamwander/rng.hpp"
#include "beamwander/spectra.hpp"

// Phase-space (ray) transport of the beam's Wigner distribution.
//
// A Gaussian Schell-model source has a Gaussian Wigner function: positions with
// per-axis std r0/2, transverse wavenumbers with per-axis std 1/r1. Rays drift as
// r += q dz / q0 and pick up q += grad(phi) at each thin layer. Layers are random
// Fourier-mode screens with the thin-layer von Karman phase spectrum, so the
// transport needs no transverse grid and can follow beams that spread over metres
// while the phase decorrelates over millimetres.

namespace beamwander {

struct KineticOptions {
  std::size_t ray_pairs = 256;   ///< antithetic pairs (r, q), (-r, -q)
  std::size_t modes = 256;       ///< Fourier modes per layer
  double kappa_min_factor = 0.05; ///< kappa_min = factor / L0
  double kappa_max_factor = 5.0;  ///< kappa_max = factor / l0'

  void validate() const {
    if (ray_pairs < 2 || modes < 8)
      throw ParameterError("kinetic estimator needs >= 2 ray pairs and >= 8 modes");
    if (!(kappa_min_factor > 0.0) || !(kappa_max_factor > 0.0))
      throw ParameterError("kinetic mode band factors must be > 0");
  }
};

struct FourierMode {
  double kx, ky; ///< rad/m
  double a, b;   ///< phi += a cos(k.r) + b sin(k.r), rad
};

/// Draws random-mode screens for one layer. Modes are stratified in ln(kappa), one per
/// stratum with a uniform offset, random direction and Gaussian amplitudes of variance
/// 2 pi kappa² Phi(kappa) dlnkappa, so the screen variance is ∫d²kappa Phi.
///
/// The random draws do not depend on cn2: screens for different turbulence strengths
/// with the same seed differ only by the factor sqrt(cn2).
class ModeScreenSampler {
public:
  ModeScreenSampler(const TurbulenceParams &turb, double dz, double q0, const KineticOptions &opts)
      : turb_(turb), dz_(dz), q0_(q0), modes_(opts.modes) {
    turb.validate();
    opts.validate();
    log_lo_ = std::log(opts.kappa_min_factor / turb.outer_scale);
    const double log_hi = std::log(opts.kappa_max_factor / turb.reduced_inner_scale());
    if (!(log_hi > log_lo_))
      throw ParameterError("kinetic mode band is empty");
    width_ = (log_hi - log_lo_) / static_cast<double>(modes_);
  }

  void draw(Engine &rng, std::vector<FourierMode> &out) const {
    std::uniform_real_distribution<double> uniform;
    std::normal_distribution<double> normal;
    out.resize(modes_);
    for (std::size_t m = 0; m < modes_; ++m) {
      const double k = std::exp(log_lo_ + (static_cast<double>(m) + uniform(rng)) * width_);
      const double theta = 2.0 * std::numbers::pi * uniform(rng);
      const double a = normal(rng), b = normal(rng);
      const double sd = std::sqrt(2.0 * std::numbers::pi * k * k *
                                  thin_layer_phase_psd(k, turb_, dz_, q0_) * width_);
      out[m] = {k * std::cos(theta), k * std::sin(theta), a * sd, b * sd};
    }
  }

private:
  TurbulenceParams turb_;
  double dz_, q0_;
  std::size_t modes_;
  double log_lo_ = 0.0, width_ = 0.0;
};

/// Gradient of a mode screen at (x, y).
inline void mode_screen_gradient(const std::vector<FourierMode> &modes, double x, double y,
                                 double &gx, double &gy) {
  gx = 0.0;
  gy = 0.0;
  for (const auto &m : modes) {
    const double t = m.kx * x + m.ky * y;
    const double d = m.b * std::cos(t) - m.a * std::sin(t);
    gx += m.kx * d;
    gy += m.ky * d;
  }
}

/// Moments of one ray ensemble at the final plane.
struct RayMoments {
  double cx = 0.0, cy = 0.0;   ///< centroid, m
  double centroid_noise = 0.0; ///< estimated variance of |centroid|² from finite ray count, m²
  double about_axis = 0.0;     ///< mean |r|², m²
  double about_centroid = 0.0; ///< mean |r - c|², m²
};

/// One atmosphere realization: rays from the source Wigner function through the plan's
/// layers. Ray and mode seeds depend on (master, atmosphere index, layer) only.
inline RayMoments trace_rays(const SourceParams &src, const TurbulenceParams &turb,
                             const PropagationPlan &plan, const KineticOptions &opts,
                             std::uint64_t master_seed, std::uint64_t atmosphere) {
  src.validate();
  plan.validate();
  opts.validate();
  const std::size_t pairs = opts.ray_pairs;
  const std::size_t n = 2 * pairs;
  std::vector<double> x(n), y(n), qx(n), qy(n);
  {
    Engine rng = make_engine(derive_seed(master_seed, Stream::rays, {atmosphere}));
    std::normal_distribution<double> normal;
    const double sr = 0.5 * src.r0, sq = 1.0 / src.r1();
    for (std::size_t k = 0; k < pairs; ++k) {
      x[k] = sr * normal(rng);
      y[k] = sr * normal(rng);
      qx[k] = sq * normal(rng);
      qy[k] = sq * normal(rng);
      x[pairs + k] = -x[k];
      y[pairs + k] = -y[k];
      qx[pairs + k] = -qx[k];
      qy[pairs + k] = -qy[k];
    }
  }

  auto drift = [&](double dz) {
    const double s = dz / src.q0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += qx[i] * s;
      y[i] += qy[i] * s;
    }
  };

  std::vector<FourierMode> modes;
  double z = 0.0;
  for (std::size_t l = 0; l < plan.n_screens(); ++l) {
    drift(plan.screen_positions[l] - z);
    z = plan.screen_positions[l];
    if (turb.cn2 == 0.0)
      continue;
    ModeScreenSampler sampler(turb, plan.layer_thickness[l], src.q0, opts);
    Engine rng = make_engine(derive_seed(master_seed, Stream::mode_screen, {atmosphere, l}));
    sampler.draw(rng, modes);
    for (std::size_t i = 0; i < n; ++i) {
      double gx, gy;
      mode_screen_gradient(modes, x[i], y[i], gx, gy);
      qx[i] += gx;
      qy[i] += gy;
    }
  }
  drift(plan.z_total - z);

  RayMoments m;
  std::vector<double> mx(pairs), my(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    mx[k] = 0.5 * (x[k] + x[pairs + k]);
    my[k] = 0.5 * (y[k] + y[pairs + k]);
    m.cx += mx[k];
    m.cy += my[k];
  }
  const double P = static_cast<double>(pairs);
  m.cx /= P;
  m.cy /= P;
  double var = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const double dx = mx[k] - m.cx, dy = my[k] - m.cy;
    var += dx * dx + dy * dy;
  }
  m.centroid_noise = var / (P - 1.0) / P;
  for (std::size_t i = 0; i < n; ++i) {
    m.about_axis += x[i] * x[i] + y[i] * y[i];
    const double dx = x[i] - m.cx, dy = y[i] - m.cy;
    m.about_centroid += dx * dx + dy * dy;
  }
  m.about_axis /= static_cast<double>(n);
  m.about_centroid /= static_cast<double>(n);
  return m;
}

} // namespace beamwander
