#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <omp.h>

#include "beamwander/analytics.hpp"
#include "beamwander/errors.hpp"
#include "beamwander/grid.hpp"
#include "beamwander/parallel.hpp"
#include "beamwander/phase_screen.hpp"
#include "beamwander/phase_space.hpp"
#include "beamwander/propagation.hpp"
#include "beamwander/rng.hpp"

namespace beamwander {

/// Intensity centroid (x, y), m.
inline std::array<double, 2> centroid(const RealField &intensity, const SimGrid &grid) {
  if (intensity.size() != grid.n)
    throw InputMismatchError("intensity and grid sizes differ");
  double total = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    double row = 0.0, rx = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double v = intensity(j, i);
      row += v;
      rx += v * grid.coord(i);
    }
    total += row;
    sx += rx;
    sy += row * grid.coord(j);
  }
  if (!(total > 0.0))
    throw DegenerateInputError("intensity has no positive total");
  return {sx / total, sy / total};
}

enum class RadiusReference { axis, centroid };

/// Second moment of intensity about the optical axis or about its own centroid, m².
inline double mean_square_radius(const RealField &intensity, const SimGrid &grid,
                                 RadiusReference about) {
  std::array<double, 2> c{0.0, 0.0};
  if (about == RadiusReference::centroid)
    c = centroid(intensity, grid);
  double total = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double y = grid.coord(j) - c[1];
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double x = grid.coord(i) - c[0];
      const double v = intensity(j, i);
      total += v;
      acc += v * (x * x + y * y);
    }
  }
  if (!(total > 0.0))
    throw DegenerateInputError("intensity has no positive total");
  return acc / total;
}

enum class Estimator { wave, kinetic };

inline std::string_view to_string(Estimator e) { return e == Estimator::wave ? "wave" : "kinetic"; }

/// Window must be at least this many analytic beam radii for the wave estimator.
inline constexpr double kWindowToBeamRadius = 8.0;
inline constexpr double kMaxAbsorbedFraction = 0.01;
inline constexpr std::size_t kMinReportedAtmospheres = 30;

struct ExperimentConfig {
  SourceParams src;
  TurbulenceParams turb{1e-15, 2.0 * std::numbers::pi * 1e-3, 100.0};
  GeometryParams geom;
  SimGrid grid{512, 2e-3};
  PropagationPlan plan = PropagationPlan::equispaced(1e4, 20);
  std::size_t n_atm = 200;
  std::size_t n_src = 16;
  std::uint64_t master_seed = 1;
  Estimator estimator = Estimator::wave;
  KineticOptions kinetic;
  int workers = 0; ///< 0: OpenMP default

  void validate() const {
    src.validate();
    turb.validate();
    geom.validate();
    plan.validate();
    if (std::abs(plan.z_total - geom.z) > 1e-9 * geom.z)
      throw ParameterError("plan length differs from z");
    if (n_atm < 1 || n_src < 1)
      throw ParameterError("n_atm and n_src must be >= 1");
    if (estimator == Estimator::wave)
      grid.validate();
    else
      kinetic.validate();
  }
};

struct RunDiagnostics {
  double max_absorbed_fraction = 0.0;
  double step_phase_variance = 0.0; ///< theoretical, rad² at one grid pitch
  double max_screen_step_phase = 0.0;
  double window_to_beam_radius = 0.0;
  bool inner_scale_unresolved = false;
  bool enough_realizations = true;
  bool strong_turbulence = false;
  bool valid = true;
  std::string message;
};

struct WanderStats {
  double rw2_mean = 0.0; ///< m²
  double rw2_se = 0.0;
  double rb2_longterm = 0.0;
  double rb2_longterm_se = 0.0;
  double rb2_shortterm = 0.0;
  double rb2_shortterm_se = 0.0;
  double rb2_analytic = 0.0;
  /// rb2_longterm - rb2_shortterm - rw2_mean and its combined standard error.
  double decomposition_residual = 0.0;
  double decomposition_se = 0.0;
  std::size_t n_atm = 0;
  std::size_t n_src = 0; ///< source realizations, or rays for the kinetic estimator
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::wave;
  RunDiagnostics diagnostics;

  double ratio() const { return rb2_analytic > 0.0 ? rw2_mean / rb2_analytic : 0.0; }
  bool decomposition_holds() const {
    return std::abs(decomposition_residual) <=
           3.0 * decomposition_se + 1e-12 * std::max(rb2_longterm, 1e-300);
  }
};

/// Per-atmosphere estimates after the slow-detector average.
struct AtmosphereSample {
  double rw2 = 0.0;   ///< |centroid|² less its finite-source-ensemble noise
  double longterm = 0.0;
  double shortterm = 0.0;
  double absorbed_fraction = 0.0;
  double max_step_phase = 0.0;
};

namespace detail {

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

inline MeanSe mean_se(const std::vector<double> &v) {
  MeanSe r;
  const double n = static_cast<double>(v.size());
  for (double x : v)
    r.mean += x;
  r.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v)
      ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

/// One atmosphere realization with the wave estimator.
inline AtmosphereSample wave_realization(const ExperimentConfig &cfg, SplitStepPropagator &prop,
                                         const ComplexField &start, std::uint64_t atm) {
  const std::size_t layers = cfg.plan.n_screens();
  std::vector<PhaseScreen> screens;
  screens.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l)
    screens.push_back(generate_turbulence_screen(
        cfg.grid, cfg.turb, cfg.plan.layer_thickness[l], cfg.src.q0,
        derive_seed(cfg.master_seed, Stream::turbulence_screen, {atm, l})));

  // A coherent source has identity source screens: every source realization is the same.
  const std::size_t n_src = cfg.src.coherent() ? 1 : cfg.n_src;
  RealField mean_intensity(cfg.grid.n, 0.0);
  std::vector<std::array<double, 2>> per_source;
  AtmosphereSample s;
  for (std::size_t k = 0; k < n_src; ++k) {
    ComplexField f = start;
    if (!cfg.src.coherent())
      apply_screen(f, generate_source_coherence_screen(
                          cfg.grid, cfg.src.lambda_c,
                          derive_seed(cfg.master_seed, Stream::source_screen, {atm, k})));
    const auto d = prop.propagate(f, cfg.plan, screens);
    s.absorbed_fraction = std::max(s.absorbed_fraction, d.absorbed_fraction());
    s.max_step_phase = std::max(s.max_step_phase, d.max_step_phase);
    const RealField I = f.intensity();
    per_source.push_back(centroid(I, cfg.grid));
    auto dst = mean_intensity.flat();
    auto src = I.flat();
    for (std::size_t p = 0; p < dst.size(); ++p)
      dst[p] += src[p];
  }

  const auto c = centroid(mean_intensity, cfg.grid);
  double noise = 0.0;
  if (n_src > 1) {
    double mx = 0.0, my = 0.0;
    for (const auto &p : per_source) {
      mx += p[0];
      my += p[1];
    }
    mx /= static_cast<double>(n_src);
    my /= static_cast<double>(n_src);
    double ss = 0.0;
    for (const auto &p : per_source)
      ss += (p[0] - mx) * (p[0] - mx) + (p[1] - my) * (p[1] - my);
    noise = ss / static_cast<double>(n_src - 1) / static_cast<double>(n_src);
  }
  s.rw2 = c[0] * c[0] + c[1] * c[1] - noise;
  s.longterm = mean_square_radius(mean_intensity, cfg.grid, RadiusReference::axis);
  s.shortterm = mean_square_radius(mean_intensity, cfg.grid, RadiusReference::centroid) + noise;
  return s;
}

inline AtmosphereSample kinetic_realization(const ExperimentConfig &cfg, std::uint64_t atm) {
  const auto m = trace_rays(cfg.src, cfg.turb, cfg.plan, cfg.kinetic, cfg.master_seed, atm);
  AtmosphereSample s;
  s.rw2 = m.cx * m.cx + m.cy * m.cy - m.centroid_noise;
  s.longterm = m.about_axis;
  s.shortterm = m.about_centroid + m.centroid_noise;
  return s;
}

} // namespace detail

/// Monte Carlo beam-wander experiment.
///
/// Each atmosphere realization fixes its layers; the final-plane intensity is averaged
/// over source realizations (slow detector) and its centroid taken. The finite source
/// ensemble adds its own centroid scatter s²/n_src to |centroid|²; that term is
/// subtracted, and moved into the short-term radius so the parallel-axis split stays
/// exact per realization. The kinetic estimator does the same with ray pairs in place of
/// source realizations. Realizations run in parallel and are reduced in index order.
inline WanderStats run_wander_experiment(const ExperimentConfig &cfg) {
  cfg.validate();
  WanderStats out;
  out.n_atm = cfg.n_atm;
  out.seed = cfg.master_seed;
  out.estimator = cfg.estimator;
  out.rb2_analytic = beam_radius_squared(cfg.src, cfg.turb, cfg.geom);
  auto &diag = out.diagnostics;
  diag.enough_realizations = cfg.n_atm >= kMinReportedAtmospheres;
  diag.strong_turbulence = strong_turbulence_condition(cfg.src, cfg.turb, cfg.geom).holds;

  std::vector<AtmosphereSample> samples(cfg.n_atm);
  const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(cfg.n_atm);

  if (cfg.estimator == Estimator::wave) {
    out.n_src = cfg.n_src;
    diag.window_to_beam_radius = cfg.grid.window() / std::sqrt(out.rb2_analytic);
    if (diag.window_to_beam_radius < kWindowToBeamRadius) {
      // Power of a Gaussian with the analytic radius outside the absorber's flat zone.
      const double a = 0.5 * cfg.plan.window.flat_fraction * cfg.grid.window();
      const double inside = std::erf(a / std::sqrt(out.rb2_analytic));
      throw ResolutionError("window " + std::to_string(cfg.grid.window()) +
                            " m is below 8 analytic beam radii (" +
                            std::to_string(kWindowToBeamRadius * std::sqrt(out.rb2_analytic)) +
                            " m); predicted absorbed power fraction " +
                            std::to_string(1.0 - inside * inside));
    }
    diag.step_phase_variance = cfg.plan.validate_for(cfg.turb, cfg.grid, cfg.src.q0);
    diag.inner_scale_unresolved = cfg.turb.cn2 > 0.0 && cfg.grid.dx > cfg.turb.inner_scale;
    const ComplexField start = initial_field(cfg.grid, cfg.src);
    // Touch the plan cache before the parallel region.
    Fft2d warm(cfg.grid.n);
    detail::LoopErrors errors;
#pragma omp parallel num_threads(threads)
    {
      SplitStepPropagator prop(cfg.grid, cfg.src.q0, cfg.plan.window);
#pragma omp for schedule(dynamic)
      for (std::int64_t i = 0; i < n; ++i)
        errors.run(i, [&] {
          samples[i] = detail::wave_realization(cfg, prop, start, static_cast<std::uint64_t>(i));
        });
    }
    errors.rethrow();
  } else {
    out.n_src = 2 * cfg.kinetic.ray_pairs;
    detail::LoopErrors errors;
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i)
      errors.run(i, [&] {
        samples[i] = detail::kinetic_realization(cfg, static_cast<std::uint64_t>(i));
      });
    errors.rethrow();
  }

  std::vector<double> rw2, lt, st, resid;
  for (const auto &s : samples) {
    rw2.push_back(s.rw2);
    lt.push_back(s.longterm);
    st.push_back(s.shortterm);
    resid.push_back(s.longterm - s.shortterm - s.rw2);
    diag.max_absorbed_fraction = std::max(diag.max_absorbed_fraction, s.absorbed_fraction);
    diag.max_screen_step_phase = std::max(diag.max_screen_step_phase, s.max_step_phase);
  }
  const auto w = detail::mean_se(rw2);
  const auto l = detail::mean_se(lt);
  const auto t = detail::mean_se(st);
  // The noise correction can push a small mean below zero; the estimate is clamped.
  out.rw2_mean = std::max(0.0, w.mean);
  out.rw2_se = w.se;
  out.rb2_longterm = l.mean;
  out.rb2_longterm_se = l.se;
  out.rb2_shortterm = t.mean;
  out.rb2_shortterm_se = t.se;
  out.decomposition_residual = l.mean - t.mean - w.mean;
  out.decomposition_se = std::sqrt(w.se * w.se + l.se * l.se + t.se * t.se);

  if (diag.max_absorbed_fraction > kMaxAbsorbedFraction) {
    diag.valid = false;
    diag.message = "absorbed power " + std::to_string(diag.max_absorbed_fraction) +
                   " exceeds 1% (window too small)";
  } else if (!diag.enough_realizations) {
    diag.message = "fewer than 30 atmosphere realizations";
  }
  return out;
}

struct SweepRow {
  double cn2 = 0.0;
  double r1_ratio = 1.0;
  WanderStats stats;
  std::string status = "ok";
  bool ok() const { return status == "ok" || status.starts_with("ok"); }
};

/// Runs the experiment for every (ratio, cn2) pair, ratio-major. The coherence length
/// for each ratio follows from inverting the effective-radius relation. Failures are
/// recorded per row and the sweep continues.
inline std::vector<SweepRow> sweep_cn2(const ExperimentConfig &base, const std::vector<double> &cn2,
                                       const std::vector<double> &ratios) {
  if (cn2.empty() || ratios.empty())
    throw ParameterError("sweep needs nonempty cn2 and ratio lists");
  for (std::size_t i = 1; i < cn2.size(); ++i)
    if (!(cn2[i] > cn2[i - 1]))
      throw ParameterError("sweep cn2 values must be strictly ascending");
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    for (double c : cn2) {
      SweepRow row;
      row.cn2 = c;
      row.r1_ratio = ratio;
      ExperimentConfig cfg = base;
      cfg.turb.cn2 = c;
      try {
        cfg.src.lambda_c = coherence_length_for_ratio(cfg.src.r0, ratio);
        row.stats = run_wander_experiment(cfg);
        if (!row.stats.diagnostics.valid)
          row.status = "invalid: " + row.stats.diagnostics.message;
        else if (!row.stats.diagnostics.enough_realizations)
          row.status = "ok-low-n";
      } catch (const Error &e) {
        row.status = std::string("error: ") + e.what();
        row.stats.seed = cfg.master_seed;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

} // namespace beamwander
