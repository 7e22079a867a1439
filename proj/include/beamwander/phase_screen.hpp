#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "beamwander/errors.hpp"
#include "beamwander/fft.hpp"
#include "beamwander/grid.hpp"
#include "beamwander/rng.hpp"
#include "beamwander/spectra.hpp"

namespace beamwander {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Effective radius r1 of a source with aperture radius r0 behind a random phase screen
/// of coherence length lambda_c: r1² = r0² / (1 + 2 r0² / lambda_c²). lambda_c may be +inf.
inline double effective_r1(double r0, double lambda_c) {
  if (!(r0 > 0.0) || !std::isfinite(r0))
    throw ParameterError("aperture radius r0 must be finite and > 0");
  if (!(lambda_c > 0.0))
    throw ParameterError("coherence length must be > 0 (or +inf)");
  if (std::isinf(lambda_c))
    return r0;
  return r0 / std::sqrt(1.0 + 2.0 * r0 * r0 / (lambda_c * lambda_c));
}

/// Coherence length that gives r1²/r0² = ratio; ratio = 1 maps to +inf.
inline double coherence_length_for_ratio(double r0, double ratio) {
  if (!(r0 > 0.0))
    throw ParameterError("aperture radius r0 must be > 0");
  if (!(ratio > 0.0) || ratio > 1.0)
    throw ParameterError("coherence ratio r1^2/r0^2 must lie in (0, 1]");
  if (ratio == 1.0)
    return kInfinity;
  return r0 * std::sqrt(2.0 / (1.0 / ratio - 1.0));
}

/// Laser source: Gaussian aperture, carrier wavenumber and transverse coherence length.
struct SourceParams {
  double r0 = 0.04;            ///< m
  double q0 = 1e7;             ///< 1/m
  double lambda_c = kInfinity; ///< m, +inf for a fully coherent source

  double r1() const { return effective_r1(r0, lambda_c); }
  bool coherent() const { return std::isinf(lambda_c); }

  void validate() const {
    (void)r1();
    if (!(q0 > 0.0) || !std::isfinite(q0))
      throw ParameterError("wavenumber q0 must be finite and > 0");
  }
};

enum class ScreenRole : std::uint32_t { turbulence_layer = 0, source_coherence = 1 };

/// Parameters the screen was drawn from; carried along for dumps and provenance.
struct ScreenSpectrum {
  double cn2 = 0.0;
  double inner_scale = 0.0;
  double outer_scale = 0.0;
  double dz = 0.0;
  double q0 = 0.0;
  double lambda_c = 0.0;
};

/// One realization of a random phase field (rad) on a grid.
struct PhaseScreen {
  SimGrid grid;
  RealField values;
  ScreenRole role = ScreenRole::turbulence_layer;
  std::uint64_t seed = 0;
  ScreenSpectrum spectrum;
  /// Set when dx > l0: the inner-scale cutoff is not sampled by the grid.
  bool inner_scale_unresolved = false;

  static PhaseScreen zeros(const SimGrid &grid, ScreenRole role) {
    PhaseScreen s;
    s.grid = grid;
    s.values = RealField(grid.n, 0.0);
    s.role = role;
    return s;
  }
};

struct ScreenOptions {
  /// Subharmonic levels (3x3 each) below the FFT's lowest frequency; < 0 selects
  /// auto_subharmonic_levels.
  int subharmonic_levels = -1;
  /// Denominator exponent of the spectrum. Only the screen-validation negative control
  /// changes this.
  double spectral_exponent = kVonKarmanExponent;
};

/// Smallest level count (at least 3) whose lowest subharmonic frequency reaches 1/L0,
/// where the von Karman spectrum flattens.
inline int auto_subharmonic_levels(const SimGrid &grid, double outer_scale) {
  int levels = 3;
  double k = grid.frequency_step() / 27.0;
  while (k > 1.0 / outer_scale && levels < 12) {
    k /= 3.0;
    ++levels;
  }
  return levels;
}

namespace detail {

/// Zero-mean Gaussian field with isotropic 2-D spectrum psd(kappa) (∫d²kappa convention):
/// FFT synthesis of complex white noise plus Lane-type 3x3 subharmonics, real part kept,
/// spatial mean removed.
template <class Psd>
RealField synthesize_screen(const SimGrid &grid, Psd &&psd, int subharmonic_levels,
                            Engine &rng, const Fft2d &fft) {
  const std::size_t n = grid.n;
  const double dk = grid.frequency_step();
  std::normal_distribution<double> normal;

  ComplexArray spec(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ky = grid.frequency(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double kx = grid.frequency(i);
      const double a = normal(rng);
      const double b = normal(rng);
      const double k = std::hypot(kx, ky);
      const double amp = (i == 0 && j == 0) ? 0.0 : std::sqrt(psd(k)) * dk;
      spec(j, i) = {a * amp, b * amp};
    }
  }
  fft.inverse_unnormalized(spec.flat());

  RealField out(n);
  auto dst = out.flat();
  auto src = spec.flat();
  for (std::size_t p = 0; p < dst.size(); ++p)
    dst[p] = src[p].real();

  std::vector<std::complex<double>> ex(n), ey(n);
  for (int level = 1; level <= subharmonic_levels; ++level) {
    const double dkp = dk / std::pow(3.0, level);
    for (int my = -1; my <= 1; ++my) {
      for (int mx = -1; mx <= 1; ++mx) {
        if (mx == 0 && my == 0)
          continue;
        const double kx = mx * dkp;
        const double ky = my * dkp;
        const double amp = std::sqrt(psd(std::hypot(kx, ky))) * dkp;
        const std::complex<double> c(normal(rng) * amp, normal(rng) * amp);
        for (std::size_t i = 0; i < n; ++i) {
          ex[i] = std::polar(1.0, kx * grid.coord(i));
          ey[i] = std::polar(1.0, ky * grid.coord(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
          const auto cy = c * ey[j];
          for (std::size_t i = 0; i < n; ++i)
            out(j, i) += (cy * ex[i]).real();
        }
      }
    }
  }

  double mean = 0.0;
  for (double v : dst)
    mean += v;
  mean /= static_cast<double>(dst.size());
  for (double &v : dst)
    v -= mean;
  return out;
}

} // namespace detail

/// Thin-layer turbulence screen of thickness dz drawn from the von Karman spectrum.
inline PhaseScreen generate_turbulence_screen(const SimGrid &grid, const TurbulenceParams &params,
                                              double dz, double q0, std::uint64_t seed,
                                              const ScreenOptions &opts = {}) {
  grid.validate();
  params.validate();
  if (!(dz > 0.0))
    throw ParameterError("layer thickness dz must be > 0");
  if (!(q0 > 0.0))
    throw ParameterError("wavenumber q0 must be > 0");

  PhaseScreen s = PhaseScreen::zeros(grid, ScreenRole::turbulence_layer);
  s.seed = seed;
  s.spectrum = {params.cn2, params.inner_scale, params.outer_scale, dz, q0, 0.0};
  s.inner_scale_unresolved = grid.dx > params.inner_scale;
  if (params.cn2 == 0.0)
    return s;

  const int levels = opts.subharmonic_levels >= 0
                         ? opts.subharmonic_levels
                         : auto_subharmonic_levels(grid, params.outer_scale);
  Engine rng = make_engine(seed);
  Fft2d fft(grid.n);
  const double exponent = opts.spectral_exponent;
  s.values = detail::synthesize_screen(
      grid, [&](double k) { return thin_layer_phase_psd(k, params, dz, q0, exponent); }, levels,
      rng, fft);
  return s;
}

/// rms phase of the source screen; its correlation length is kSourcePhaseStd * lambda_c.
inline constexpr double kSourcePhaseStd = 4.0;

/// Gaussian-correlated random phase, C(rho) = s² exp(-rho²/(s lambda_c)²) with s = 4, whose
/// mutual coherence exp(-D(rho)/2) approximates exp(-rho²/lambda_c²) for rho <= 2 lambda_c
/// and whose mean-square gradient is exactly 4/lambda_c². lambda_c = +inf returns zeros.
inline PhaseScreen generate_source_coherence_screen(const SimGrid &grid, double lambda_c,
                                                    std::uint64_t seed) {
  grid.validate();
  if (!(lambda_c > 0.0))
    throw ParameterError("coherence length must be > 0");
  PhaseScreen s = PhaseScreen::zeros(grid, ScreenRole::source_coherence);
  s.seed = seed;
  s.spectrum.lambda_c = lambda_c;
  if (std::isinf(lambda_c))
    return s;
  if (lambda_c < 4.0 * grid.dx)
    throw ResolutionError("coherence length below 4 grid pitches cannot be represented");

  const double sigma2 = kSourcePhaseStd * kSourcePhaseStd;
  const double ell = kSourcePhaseStd * lambda_c;
  auto psd = [&](double k) {
    return sigma2 * ell * ell / (4.0 * std::numbers::pi) * std::exp(-k * k * ell * ell / 4.0);
  };
  Engine rng = make_engine(seed);
  Fft2d fft(grid.n);
  s.values = detail::synthesize_screen(grid, psd, 3, rng, fft);
  return s;
}

/// One row of an empirical structure-function (or coherence) table.
struct SeparationStat {
  double separation = 0.0; ///< m
  double value = 0.0;
  double std_error = 0.0;
};

/// Streaming estimator of axis-averaged statistics of screen differences at a set of
/// pixel separations. Each screen contributes one sample per separation (its mean over
/// all pairs along x and y); the table reports the mean over screens and its standard
/// error.
class SeparationAccumulator {
public:
  enum class Kind { structure_function, coherence };

  SeparationAccumulator(const SimGrid &grid, std::vector<std::size_t> pixel_separations,
                        Kind kind)
      : grid_(grid), seps_(std::move(pixel_separations)), kind_(kind), sum_(seps_.size()),
        sum_sq_(seps_.size()) {
    for (auto s : seps_)
      if (s == 0 || s >= grid_.n)
        throw ParameterError("pixel separation must lie in [1, n)");
  }

  /// Per-separation sample of one screen; independent of the accumulator state.
  std::vector<double> sample(const PhaseScreen &screen) const {
    if (!(screen.grid == grid_))
      throw InputMismatchError("screen grid differs from the ensemble grid");
    const std::size_t n = grid_.n;
    const auto &v = screen.values;
    std::vector<double> out(seps_.size());
    for (std::size_t k = 0; k < seps_.size(); ++k) {
      const std::size_t s = seps_[k];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i + s < n; ++i) {
          acc += term(v(j, i + s) - v(j, i));
          acc += term(v(i + s, j) - v(i, j));
        }
      }
      out[k] = acc / static_cast<double>(2 * n * (n - s));
    }
    return out;
  }

  void add_sample(const std::vector<double> &sample) {
    if (sample.size() != seps_.size())
      throw InputMismatchError("sample length differs from the separation list");
    for (std::size_t k = 0; k < seps_.size(); ++k) {
      sum_[k] += sample[k];
      sum_sq_[k] += sample[k] * sample[k];
    }
    ++count_;
  }

  void add(const PhaseScreen &screen) { add_sample(sample(screen)); }

  std::size_t count() const { return count_; }

  std::vector<SeparationStat> table() const {
    std::vector<SeparationStat> out;
    const double m = static_cast<double>(count_);
    for (std::size_t k = 0; k < seps_.size(); ++k) {
      const double mean = count_ ? sum_[k] / m : 0.0;
      double se = 0.0;
      if (count_ > 1) {
        const double var = std::max(0.0, (sum_sq_[k] - m * mean * mean) / (m - 1.0));
        se = std::sqrt(var / m);
      }
      out.push_back({static_cast<double>(seps_[k]) * grid_.dx, mean, se});
    }
    return out;
  }

private:
  double term(double d) const {
    return kind_ == Kind::structure_function ? d * d : std::cos(d);
  }

  SimGrid grid_;
  std::vector<std::size_t> seps_;
  Kind kind_;
  std::vector<double> sum_, sum_sq_;
  std::size_t count_ = 0;
};

/// Pixel separations 1..max_pixels.
inline std::vector<std::size_t> separations_up_to(std::size_t max_pixels) {
  std::vector<std::size_t> s(max_pixels);
  for (std::size_t i = 0; i < max_pixels; ++i)
    s[i] = i + 1;
  return s;
}

inline constexpr std::size_t kMinStructureEnsemble = 100;

/// Empirical phase structure function of an ensemble sharing one grid, at pixel
/// separations 1..n/4.
inline std::vector<SeparationStat> screen_structure_function(std::span<const PhaseScreen> screens) {
  if (screens.size() < kMinStructureEnsemble)
    throw ParameterError("structure function needs at least 100 screens");
  const SimGrid grid = screens.front().grid;
  SeparationAccumulator acc(grid, separations_up_to(grid.n / 4),
                            SeparationAccumulator::Kind::structure_function);
  for (const auto &s : screens)
    acc.add(s);
  return acc.table();
}

} // namespace beamwander
