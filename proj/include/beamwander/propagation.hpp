#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "beamwander/errors.hpp"
#include "beamwander/fft.hpp"
#include "beamwander/grid.hpp"
#include "beamwander/phase_screen.hpp"
#include "beamwander/spectra.hpp"

namespace beamwander {

/// Complex scalar amplitude on a grid at range z.
struct ComplexField {
  SimGrid grid;
  ComplexArray values;
  double z = 0.0;

  /// P = Σ|u|² dx².
  double power() const {
    double p = 0.0;
    for (const auto &v : values.flat())
      p += std::norm(v);
    return p * grid.dx * grid.dx;
  }

  RealField intensity() const {
    RealField out(grid.n);
    auto dst = out.flat();
    auto src = values.flat();
    for (std::size_t i = 0; i < src.size(); ++i)
      dst[i] = std::norm(src[i]);
    return out;
  }
};

/// Collimated Gaussian beam u ∝ exp(-r²/r0²) at z = 0 with unit power; partial coherence
/// is applied separately by a source screen.
inline ComplexField initial_field(const SimGrid &grid, const SourceParams &source) {
  grid.validate();
  source.validate();
  if (source.r0 < 8.0 * grid.dx)
    throw ResolutionError("beam under-resolved: need r0 >= 8 dx");
  ComplexField f{grid, ComplexArray(grid.n), 0.0};
  const double inv = 1.0 / (source.r0 * source.r0);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double y = grid.coord(j);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double x = grid.coord(i);
      f.values(j, i) = std::exp(-(x * x + y * y) * inv);
    }
  }
  const double scale = 1.0 / std::sqrt(f.power());
  for (auto &v : f.values.flat())
    v *= scale;
  return f;
}

/// Largest vacuum step whose paraxial chirp, sampled on the FFT frequency lattice,
/// advances by at most pi between neighbouring bins at the Nyquist edge.
inline double max_vacuum_step(const SimGrid &grid, double q0) {
  return q0 * grid.dx * grid.window() / (2.0 * std::numbers::pi);
}

/// Super-Gaussian edge absorber: exactly 1 over the central `flat_fraction` of each
/// axis, rolling off as exp(-(d/w)^order) beyond it (d distance past the flat zone,
/// w = rolloff * window).
struct WindowProfile {
  double flat_fraction = 0.8;
  double rolloff = 0.05;
  int order = 4;

  double axis_gain(double x, double window) const {
    const double d = std::abs(x) - 0.5 * flat_fraction * window;
    if (d <= 0.0)
      return 1.0;
    return std::exp(-std::pow(d / (rolloff * window), order));
  }
};

/// Screen layout along z. Screen k sits at screen_positions[k] and represents the layer
/// of thickness layer_thickness[k]; equispaced plans place screens at segment midpoints,
/// which makes propagate a symmetric (half step, screen, half step) splitting.
struct PropagationPlan {
  double z_total = 0.0;
  std::vector<double> screen_positions;
  std::vector<double> layer_thickness;
  WindowProfile window;

  std::size_t n_screens() const { return screen_positions.size(); }

  static PropagationPlan equispaced(double z_total, std::size_t n_screens) {
    if (!(z_total > 0.0) || n_screens == 0)
      throw ParameterError("plan needs z_total > 0 and at least one screen");
    PropagationPlan p;
    p.z_total = z_total;
    const double seg = z_total / static_cast<double>(n_screens);
    for (std::size_t k = 0; k < n_screens; ++k) {
      p.screen_positions.push_back((static_cast<double>(k) + 0.5) * seg);
      p.layer_thickness.push_back(seg);
    }
    return p;
  }

  /// Default screen count: one per 500 m, never fewer than 10.
  static std::size_t default_screen_count(double z_total) {
    return std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(z_total / 500.0 - 1e-9)));
  }

  void validate() const {
    if (!(z_total > 0.0))
      throw ParameterError("plan z_total must be > 0");
    if (screen_positions.size() != layer_thickness.size() || screen_positions.empty())
      throw ParameterError("plan needs one layer thickness per screen");
    double prev = 0.0;
    for (std::size_t k = 0; k < screen_positions.size(); ++k) {
      const double p = screen_positions[k];
      if (p < prev || p > z_total)
        throw ParameterError("screen positions must be ascending inside [0, z_total]");
      if (k > 0 && p - prev > z_total / 10.0 + 1e-9 * z_total)
        throw ParameterError("screen spacing exceeds z_total / 10");
      if (!(layer_thickness[k] > 0.0))
        throw ParameterError("layer thickness must be > 0");
      prev = p;
    }
    if (screen_positions.front() > z_total / 10.0 + 1e-9 * z_total ||
        z_total - screen_positions.back() > z_total / 10.0 + 1e-9 * z_total)
      throw ParameterError("screen spacing exceeds z_total / 10");
  }

  /// Phase structure function at one grid pitch for the thickest layer, rad². This is
  /// the per-step phase variance the thin-screen sampling limit is checked against.
  double step_phase_variance(const TurbulenceParams &turb, const SimGrid &grid, double q0) const {
    if (turb.cn2 == 0.0)
      return 0.0;
    const double dz = *std::max_element(layer_thickness.begin(), layer_thickness.end());
    return theoretical_phase_structure_function(grid.dx, turb, dz, q0, 1e-6);
  }

  /// Refuses plans whose screens are not sampled by the grid (step phase variance >= 1 rad²).
  double validate_for(const TurbulenceParams &turb, const SimGrid &grid, double q0) const {
    validate();
    const double v = step_phase_variance(turb, grid, q0);
    if (v >= 1.0)
      throw ParameterError("per-step phase variance at the grid pitch is " + std::to_string(v) +
                           " rad^2 (>= 1): add screens or refine the grid");
    return v;
  }
};

struct PropagationDiagnostics {
  double initial_power = 0.0;
  double absorbed_power = 0.0;
  /// Largest mean-square phase difference between neighbouring pixels over applied screens.
  double max_step_phase = 0.0;
  std::size_t vacuum_steps = 0;

  double absorbed_fraction() const {
    return initial_power > 0.0 ? absorbed_power / initial_power : 0.0;
  }
};

inline void check_same_grid(const SimGrid &a, const SimGrid &b) {
  if (!(a == b))
    throw InputMismatchError("field and screen grids differ");
}

/// Multiplies the field by exp(i phi); intensity is unchanged pointwise.
inline void apply_screen(ComplexField &field, const PhaseScreen &screen) {
  check_same_grid(field.grid, screen.grid);
  auto u = field.values.flat();
  auto phi = screen.values.flat();
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] *= std::polar(1.0, phi[i]);
}

/// Mean-square phase difference between neighbouring pixels (x and y pairs).
inline double adjacent_phase_variance(const PhaseScreen &screen) {
  const auto &v = screen.values;
  const std::size_t n = screen.grid.n;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dx = v(j, i + 1) - v(j, i);
      const double dy = v(i + 1, j) - v(i, j);
      acc += dx * dx + dy * dy;
    }
  return acc / static_cast<double>(2 * n * (n - 1));
}

/// Split-step machinery bound to one grid and carrier: owns the FFT plan handle, cached
/// paraxial transfer functions and the absorber mask. One instance per worker.
class SplitStepPropagator {
public:
  SplitStepPropagator(const SimGrid &grid, double q0, WindowProfile window = {})
      : grid_(grid), q0_(q0), fft_(grid.n), mask_(grid.n) {
    grid_.validate();
    if (!(q0 > 0.0))
      throw ParameterError("wavenumber q0 must be > 0");
    std::vector<double> g(grid_.n);
    for (std::size_t i = 0; i < grid_.n; ++i)
      g[i] = window.axis_gain(grid_.coord(i), grid_.window());
    for (std::size_t j = 0; j < grid_.n; ++j)
      for (std::size_t i = 0; i < grid_.n; ++i)
        mask_(j, i) = g[j] * g[i];
  }

  const SimGrid &grid() const { return grid_; }
  double q0() const { return q0_; }
  double max_step() const { return max_vacuum_step(grid_, q0_); }

  /// Advances the field by dz with the paraxial transfer function exp(-i |q|² dz / (2 q0)).
  void step(ComplexField &field, double dz) {
    check_same_grid(field.grid, grid_);
    if (dz < 0.0)
      throw ParameterError("vacuum step must be >= 0");
    if (dz == 0.0)
      return;
    if (dz > max_step() * (1.0 + 1e-12))
      throw StepSizeError("vacuum step aliases the transfer function", max_step());
    const auto &kernel = transfer(dz);
    auto u = field.values.flat();
    fft_.forward(u);
    for (std::size_t i = 0; i < u.size(); ++i)
      u[i] *= kernel[i];
    fft_.inverse(u);
    field.z += dz;
  }

  /// Steps dz in as many equal sub-steps as the aliasing limit requires.
  std::size_t advance(ComplexField &field, double dz) {
    if (dz <= 0.0)
      return 0;
    const auto pieces = static_cast<std::size_t>(std::ceil(dz / max_step() - 1e-12));
    const double sub = dz / static_cast<double>(std::max<std::size_t>(1, pieces));
    for (std::size_t k = 0; k < std::max<std::size_t>(1, pieces); ++k)
      step(field, sub);
    return std::max<std::size_t>(1, pieces);
  }

  /// Applies the edge absorber; returns the power removed.
  double absorb(ComplexField &field) const {
    check_same_grid(field.grid, grid_);
    auto u = field.values.flat();
    auto m = mask_.flat();
    double removed = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double before = std::norm(u[i]);
      u[i] *= m[i];
      removed += before - std::norm(u[i]);
    }
    return removed * grid_.dx * grid_.dx;
  }

  /// Vacuum segments between screens, each followed by the absorber.
  PropagationDiagnostics propagate(ComplexField &field, const PropagationPlan &plan,
                                   std::span<const PhaseScreen> screens) {
    plan.validate();
    if (screens.size() != plan.n_screens())
      throw InputMismatchError("screen count differs from the plan");
    PropagationDiagnostics d;
    d.initial_power = field.power();
    double z = 0.0;
    for (std::size_t k = 0; k < screens.size(); ++k) {
      d.vacuum_steps += advance(field, plan.screen_positions[k] - z);
      d.absorbed_power += absorb(field);
      z = plan.screen_positions[k];
      apply_screen(field, screens[k]);
      d.max_step_phase = std::max(d.max_step_phase, adjacent_phase_variance(screens[k]));
    }
    d.vacuum_steps += advance(field, plan.z_total - z);
    d.absorbed_power += absorb(field);
    field.z = plan.z_total;
    return d;
  }

private:
  const std::vector<std::complex<double>> &transfer(double dz) {
    for (const auto &[key, kernel] : kernels_)
      if (key == dz)
        return kernel;
    std::vector<std::complex<double>> k(grid_.n * grid_.n);
    for (std::size_t j = 0; j < grid_.n; ++j) {
      const double ky = grid_.frequency(j);
      for (std::size_t i = 0; i < grid_.n; ++i) {
        const double kx = grid_.frequency(i);
        k[j * grid_.n + i] = std::polar(1.0, -(kx * kx + ky * ky) * dz / (2.0 * q0_));
      }
    }
    if (kernels_.size() > 8)
      kernels_.erase(kernels_.begin());
    kernels_.emplace_back(dz, std::move(k));
    return kernels_.back().second;
  }

  SimGrid grid_;
  double q0_;
  Fft2d fft_;
  RealField mask_;
  std::vector<std::pair<double, std::vector<std::complex<double>>>> kernels_;
};

/// One vacuum step of length dz (no absorber).
inline void angular_spectrum_step(ComplexField &field, double dz, double q0) {
  SplitStepPropagator(field.grid, q0).step(field, dz);
}

/// Applies the default edge absorber; returns the absorbed power.
inline double absorbing_window(ComplexField &field, const WindowProfile &profile = {}) {
  return SplitStepPropagator(field.grid, 1.0, profile).absorb(field);
}

/// End-to-end split-step propagation through the plan's screens.
inline PropagationDiagnostics propagate(ComplexField &field, const PropagationPlan &plan,
                                        std::span<const PhaseScreen> screens, double q0) {
  return SplitStepPropagator(field.grid, q0, plan.window).propagate(field, plan, screens);
}

} // namespace beamwander
