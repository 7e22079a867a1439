#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <omp.h>

#include "beamwander/errors.hpp"
#include "beamwander/parallel.hpp"
#include "beamwander/phase_screen.hpp"
#include "beamwander/rng.hpp"
#include "beamwander/spectra.hpp"

namespace beamwander {

struct ScreenValidationOptions {
  std::size_t screens = 2000;
  std::size_t max_bins = 12;      ///< log-spaced pixel separations inside the checked range
  double tolerance = 0.10;        ///< relative
  double spectral_exponent = kVonKarmanExponent;
  std::uint64_t master_seed = 1;
  int workers = 0;
};

struct ScreenValidationBin {
  double separation = 0.0; ///< m
  double empirical = 0.0;  ///< rad²
  double std_error = 0.0;
  double theory = 0.0;
  double relative_error = 0.0;
  bool in_range = false;
  bool pass = true;
};

struct ScreenValidationReport {
  std::vector<ScreenValidationBin> bins;
  double range_lo = 0.0, range_hi = 0.0; ///< m
  std::size_t screens = 0;
  bool pass = false;
};

/// Pixel separations covering [lo, hi] (m) roughly log-uniformly, plus one pixel and the
/// range edges.
inline std::vector<std::size_t> validation_separations(const SimGrid &grid, double lo, double hi,
                                                       std::size_t bins) {
  std::set<std::size_t> s{1};
  const auto first = static_cast<std::size_t>(std::ceil(lo / grid.dx - 1e-9));
  const auto last = static_cast<std::size_t>(std::floor(hi / grid.dx + 1e-9));
  if (first <= last && last < grid.n) {
    s.insert(first);
    s.insert(last);
    for (std::size_t b = 1; b + 1 < bins; ++b) {
      const double f = static_cast<double>(b) / static_cast<double>(bins - 1);
      s.insert(static_cast<std::size_t>(std::lround(static_cast<double>(first) *
                                                    std::pow(static_cast<double>(last) / first, f))));
    }
  }
  return {s.begin(), s.end()};
}

/// Compares the empirical structure function of an ensemble of turbulence screens with
/// the quadrature curve. Bins inside [5 l0, min(L0, window)/10] must agree within the
/// tolerance for the report to pass; bins outside are listed for information.
inline ScreenValidationReport validate_turbulence_screens(const SimGrid &grid,
                                                          const TurbulenceParams &turb, double dz,
                                                          double q0,
                                                          const ScreenValidationOptions &opts) {
  grid.validate();
  turb.validate();
  if (opts.screens < kMinStructureEnsemble)
    throw ParameterError("screen validation needs at least 100 screens");
  ScreenValidationReport rep;
  rep.screens = opts.screens;
  rep.range_lo = 5.0 * turb.inner_scale;
  rep.range_hi = std::min(turb.outer_scale, grid.window()) / 10.0;
  const auto seps = validation_separations(grid, rep.range_lo, rep.range_hi, opts.max_bins);

  SeparationAccumulator acc(grid, seps, SeparationAccumulator::Kind::structure_function);
  std::vector<std::vector<double>> samples(opts.screens);
  ScreenOptions so;
  so.spectral_exponent = opts.spectral_exponent;
  const int threads = opts.workers > 0 ? opts.workers : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(opts.screens);
  Fft2d warm(grid.n);
  detail::LoopErrors errors;
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i)
    errors.run(i, [&] {
      const auto seed =
          derive_seed(opts.master_seed, Stream::validation, {static_cast<std::uint64_t>(i)});
      samples[i] = acc.sample(generate_turbulence_screen(grid, turb, dz, q0, seed, so));
    });
  errors.rethrow();
  for (const auto &s : samples)
    acc.add_sample(s);

  bool any = false;
  rep.pass = true;
  for (const auto &row : acc.table()) {
    ScreenValidationBin b;
    b.separation = row.separation;
    b.empirical = row.value;
    b.std_error = row.std_error;
    b.theory = theoretical_phase_structure_function(row.separation, turb, dz, q0, 1e-8);
    b.in_range = row.separation >= rep.range_lo * (1 - 1e-9) &&
                 row.separation <= rep.range_hi * (1 + 1e-9);
    if (b.theory > 0.0)
      b.relative_error = (b.empirical - b.theory) / b.theory;
    else
      b.relative_error = b.empirical == 0.0 ? 0.0 : 1.0;
    b.pass = std::abs(b.relative_error) <= opts.tolerance;
    if (b.in_range) {
      any = true;
      rep.pass = rep.pass && b.pass;
    }
    rep.bins.push_back(b);
  }
  rep.pass = rep.pass && any;
  return rep;
}

} // namespace beamwander
