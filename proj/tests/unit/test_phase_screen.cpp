#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "beamwander/phase_screen.hpp"
#include "beamwander/screen_validation.hpp"

using namespace beamwander;

namespace {

constexpr double pi = std::numbers::pi;
const TurbulenceParams kTurb{1e-14, 2 * pi * 1e-3, 100.0};

double variance(const PhaseScreen &s) {
  double m = 0, q = 0;
  for (double v : s.values.flat()) {
    m += v;
    q += v * v;
  }
  const double n = static_cast<double>(s.values.flat().size());
  return q / n - (m / n) * (m / n);
}

} // namespace

TEST(EffectiveRadius, CoherentSourceKeepsAperture) {
  EXPECT_EQ(effective_r1(0.04, kInfinity), 0.04);
  SourceParams s;
  EXPECT_TRUE(s.coherent());
  EXPECT_EQ(s.r1(), s.r0);
}

TEST(EffectiveRadius, SqrtTwoCoherenceHalvesArea) {
  const double r0 = 0.03;
  const double r1 = effective_r1(r0, r0 * std::sqrt(2.0));
  EXPECT_NEAR(r1 * r1, r0 * r0 / 2, 1e-15);
}

TEST(EffectiveRadius, InversionForOneEighth) {
  const double lc = coherence_length_for_ratio(0.04, 0.125);
  EXPECT_NEAR(lc, 0.0213808993529940, 1e-12);
  const double r1 = effective_r1(0.04, lc);
  EXPECT_NEAR(r1 * r1 / (0.04 * 0.04), 0.125, 1e-12);
  EXPECT_TRUE(std::isinf(coherence_length_for_ratio(0.04, 1.0)));
}

TEST(EffectiveRadius, NeverExceedsAperture) {
  for (double lc = 1e-4; lc < 10; lc *= 1.7)
    EXPECT_LT(effective_r1(0.04, lc), 0.04);
}

TEST(EffectiveRadius, DomainErrors) {
  EXPECT_THROW(effective_r1(0.0, 1.0), ParameterError);
  EXPECT_THROW(effective_r1(0.04, 0.0), ParameterError);
  EXPECT_THROW(effective_r1(0.04, -1.0), ParameterError);
  EXPECT_THROW(coherence_length_for_ratio(0.04, 1.5), ParameterError);
}

TEST(TurbulenceScreen, ZeroCn2IsZero) {
  const auto s = generate_turbulence_screen({64, 1e-3}, {0.0, 2 * pi * 1e-3, 100}, 500, 1e7, 7);
  for (double v : s.values.flat())
    EXPECT_EQ(v, 0.0);
}

TEST(TurbulenceScreen, SeedDeterminism) {
  const SimGrid g{128, 2e-3};
  const auto a = generate_turbulence_screen(g, kTurb, 500, 1e7, 42);
  const auto b = generate_turbulence_screen(g, kTurb, 500, 1e7, 42);
  const auto c = generate_turbulence_screen(g, kTurb, 500, 1e7, 43);
  EXPECT_TRUE(a.values == b.values);
  EXPECT_FALSE(a.values == c.values);
  EXPECT_EQ(a.role, ScreenRole::turbulence_layer);
  EXPECT_EQ(a.seed, 42u);
}

TEST(TurbulenceScreen, FiniteZeroMeanAndFlagsCoarseGrid) {
  const auto s = generate_turbulence_screen({64, 1e-2}, kTurb, 500, 1e7, 1);
  double mean = 0;
  for (double v : s.values.flat()) {
    EXPECT_TRUE(std::isfinite(v));
    mean += v;
  }
  EXPECT_NEAR(mean / 4096, 0.0, 1e-9);
  EXPECT_TRUE(s.inner_scale_unresolved);
  EXPECT_FALSE(generate_turbulence_screen({64, 1e-3}, kTurb, 500, 1e7, 1).inner_scale_unresolved);
}

TEST(TurbulenceScreen, EnsembleMeanTendsToZero) {
  const SimGrid g{64, 4e-3};
  double sum = 0, sum_var = 0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const auto s = generate_turbulence_screen(g, kTurb, 500, 1e7, 1000 + i);
    sum += s.values(5, 9);
    sum_var += variance(s);
  }
  // Pointwise ensemble mean within 4 standard errors of zero (a generous bound: the
  // within-screen variance understates the pointwise one).
  EXPECT_LT(std::abs(sum / n), 4 * std::sqrt(10 * sum_var / n / n));
}

TEST(TurbulenceScreen, VarianceScalesWithCn2) {
  const SimGrid g{64, 4e-3};
  TurbulenceParams strong = kTurb;
  strong.cn2 *= 7;
  double va = 0, vb = 0;
  for (int i = 0; i < 1000; ++i) {
    va += variance(generate_turbulence_screen(g, kTurb, 500, 1e7, i));
    vb += variance(generate_turbulence_screen(g, strong, 500, 1e7, i));
  }
  EXPECT_NEAR(vb / va, 7.0, 0.02 * 7.0);
}

TEST(TurbulenceScreen, LargerOuterScaleAddsVariance) {
  const SimGrid g{64, 4e-3};
  TurbulenceParams small = kTurb;
  small.outer_scale = 1.0;
  double v_big = 0, v_small = 0;
  for (int i = 0; i < 200; ++i) {
    v_big += variance(generate_turbulence_screen(g, kTurb, 500, 1e7, i));
    v_small += variance(generate_turbulence_screen(g, small, 500, 1e7, 5000 + i));
  }
  EXPECT_GT(v_big, v_small);
}

TEST(TurbulenceScreen, AutoSubharmonicsReachOuterScale) {
  const SimGrid g{512, 2e-3};
  const int levels = auto_subharmonic_levels(g, 100.0);
  EXPECT_GE(levels, 3);
  EXPECT_LE(g.frequency_step() / std::pow(3.0, levels), 1.0 / 100.0);
  EXPECT_GT(g.frequency_step() / std::pow(3.0, levels - 1), 1.0 / 100.0);
  EXPECT_EQ(auto_subharmonic_levels(g, 0.1), 3);
}

TEST(TurbulenceScreen, StructureFunctionMatchesTheoryOnSmallEnsemble) {
  // Coarse version of the 2000-screen acceptance check: 300 screens, 20% tolerance.
  ScreenValidationOptions opts;
  opts.screens = 300;
  opts.tolerance = 0.2;
  const auto rep = validate_turbulence_screens({256, 2e-3}, kTurb, 500, 1e7, opts);
  EXPECT_TRUE(rep.pass);
}

TEST(TurbulenceScreen, WrongSpectralExponentFailsValidation) {
  ScreenValidationOptions opts;
  opts.screens = 100;
  opts.spectral_exponent = 1.5;
  const auto rep = validate_turbulence_screens({256, 2e-3}, kTurb, 500, 1e7, opts);
  EXPECT_FALSE(rep.pass);
}

TEST(TurbulenceScreen, ZeroCn2ValidationIsTriviallyConsistent) {
  ScreenValidationOptions opts;
  opts.screens = 100;
  const auto rep = validate_turbulence_screens({64, 2e-3}, {0.0, 2e-3, 100}, 500, 1e7, opts);
  EXPECT_TRUE(rep.pass);
  for (const auto &b : rep.bins)
    EXPECT_EQ(b.empirical, 0.0);
}

TEST(SourceScreen, InfiniteCoherenceIsIdentity) {
  const auto s = generate_source_coherence_screen({64, 1e-3}, kInfinity, 3);
  EXPECT_EQ(s.role, ScreenRole::source_coherence);
  for (double v : s.values.flat())
    EXPECT_EQ(v, 0.0);
}

TEST(SourceScreen, UnresolvedCoherenceLengthRejected) {
  EXPECT_THROW(generate_source_coherence_screen({64, 1e-2}, 0.03, 1), ResolutionError);
  EXPECT_THROW(generate_source_coherence_screen({64, 1e-2}, 0.0, 1), ParameterError);
}

TEST(SourceScreen, CoherenceFactorIsGaussianInsideTwoLengths) {
  const double lc = 0.0566;
  const SimGrid g{128, lc / 8};
  std::vector<std::size_t> seps;
  for (std::size_t s = 1; s <= 16; ++s)
    seps.push_back(s);
  seps.push_back(64);
  SeparationAccumulator acc(g, seps, SeparationAccumulator::Kind::coherence);
  for (std::uint64_t i = 0; i < 400; ++i)
    acc.add(generate_source_coherence_screen(g, lc, 100 + i));
  const auto table = acc.table();
  for (std::size_t k = 0; k + 1 < table.size(); ++k) {
    const double rho = table[k].separation;
    EXPECT_NEAR(table[k].value, std::exp(-rho * rho / (lc * lc)), 0.03) << rho;
  }
  EXPECT_LT(std::abs(table.back().value), 0.02); // 8 lc apart: decorrelated
}

TEST(StructureFunctionTable, ZeroScreensGiveZero) {
  std::vector<PhaseScreen> screens(100, PhaseScreen::zeros({64, 1e-3}, ScreenRole::turbulence_layer));
  for (const auto &row : screen_structure_function(screens))
    EXPECT_EQ(row.value, 0.0);
}

TEST(StructureFunctionTable, WhiteNoiseGivesTwiceTheVariance) {
  const SimGrid g{64, 1e-3};
  const double sigma = 0.7;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<PhaseScreen> screens;
  for (int i = 0; i < 120; ++i) {
    auto s = PhaseScreen::zeros(g, ScreenRole::turbulence_layer);
    for (double &v : s.values.flat())
      v = normal(rng);
    screens.push_back(std::move(s));
  }
  const auto table = screen_structure_function(screens);
  ASSERT_EQ(table.size(), 16u);
  for (const auto &row : table) {
    EXPECT_NEAR(row.value, 2 * sigma * sigma, 0.02);
    EXPECT_GT(row.std_error, 0.0);
  }
}

TEST(StructureFunctionTable, RejectsMixedGridsAndSmallEnsembles) {
  std::vector<PhaseScreen> screens(100, PhaseScreen::zeros({64, 1e-3}, ScreenRole::turbulence_layer));
  EXPECT_THROW(screen_structure_function(std::span(screens).first(50)), ParameterError);
  screens[7] = PhaseScreen::zeros({64, 2e-3}, ScreenRole::turbulence_layer);
  EXPECT_THROW(screen_structure_function(screens), InputMismatchError);
}
