#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "beamwander/analytics.hpp"

using namespace beamwander;

namespace {

constexpr double pi = std::numbers::pi;
const TurbulenceParams kTurb = TurbulenceParams::from_reduced_inner_scale(1e-15, 1e-3, 100);

SourceParams source(double r0, double ratio = 1.0) {
  return {r0, 1e7, coherence_length_for_ratio(r0, ratio)};
}

// Midpoint rule with 1e7 cells.
double i1_riemann(double a2) {
  const int n = 10'000'000;
  const double h = 1.0 / n;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    s += (x - 1) * (x - 1) * std::pow(x * x + a2, -1.0 / 6.0);
  }
  return s * h;
}

} // namespace

TEST(I1Integral, EndpointValueIs27Over40) {
  EXPECT_NEAR(i1_integral(0.0), 27.0 / 40.0, 1e-6);
  EXPECT_NEAR(i1_integral(0.0), 1.5 - 1.2 + 0.375, 1e-10);
}

TEST(I1Integral, LargeParameterAsymptote) {
  for (double a2 : {1e4, 1e6})
    EXPECT_NEAR(i1_integral(a2) / (std::pow(a2, -1.0 / 6.0) / 3.0), 1.0, 0.01) << a2;
}

TEST(I1Integral, AgreesWithBruteForceRiemannSum) {
  EXPECT_NEAR(i1_integral(1.0), i1_riemann(1.0), 1e-6);
  EXPECT_NEAR(i1_integral(1.0), 0.328501938411867, 1e-9); // 20-digit reference
}

TEST(I1Integral, DecreasingWithinRange) {
  double prev = i1_integral(0.0);
  for (double a2 = 1e-8; a2 < 1e8; a2 *= 3) {
    const double v = i1_integral(a2);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
  EXPECT_THROW(i1_integral(-1e-3), ParameterError);
}

TEST(WeakWander, ZeroTurbulence) {
  EXPECT_EQ(wander_variance_weak(source(0.04), {0.0, 2e-3, 100}, {5e3}).rw2, 0.0);
}

TEST(WeakWander, WorkedExampleFiveKilometres) {
  const auto p = wander_variance_weak(source(0.04), kTurb, {5e3});
  EXPECT_NEAR(p.a2, 2.5664, 1e-10);
  EXPECT_NEAR(p.i1, i1_riemann(2.5664), 1e-6);
  const double oracle = 0.066 * pi * pi * 5.566316001780235 * 1e-15 * std::pow(5e3, 8.0 / 3.0) *
                        std::cbrt(1e7 * 0.04) * i1_riemann(2.5664);
  EXPECT_NEAR(p.rw2 / oracle, 1.0, 1e-6);
  EXPECT_NEAR(p.rw2, 5.52941128239939e-4, 1e-12);
  EXPECT_EQ(p.regime, WanderRegime::weak_analytic);
}

TEST(WeakWander, CoincidesWithClassicFormulaAtShortRange) {
  for (double cn2 : {1e-16, 1e-15, 1e-14, 1e-13}) {
    TurbulenceParams t = kTurb;
    t.cn2 = cn2;
    const auto p = wander_variance_weak(source(0.04), t, {100.0});
    EXPECT_EQ(p.regime, WanderRegime::asymptotic_short);
    EXPECT_NEAR(p.rw2 / classic_wander(cn2, 100.0, 0.04), 1.0, 0.02) << cn2;
  }
}

TEST(WeakWander, ExactlyLinearInCn2) {
  TurbulenceParams t = kTurb;
  t.cn2 *= 3;
  const double a = wander_variance_weak(source(0.04), kTurb, {5e3}).rw2;
  const double b = wander_variance_weak(source(0.04), t, {5e3}).rw2;
  EXPECT_NEAR(b / a, 3.0, 1e-14);
}

TEST(WeakWander, ShortRangeIndependentOfCoherence) {
  const double a = wander_variance_weak(source(0.04, 1.0), kTurb, {100.0}).rw2;
  const double b = wander_variance_weak(source(0.04, 0.25), kTurb, {100.0}).rw2;
  EXPECT_NEAR(b / a, 1.0, 0.02);
}

TEST(WeakWander, LongRangeScalesAsCubeRootOfR1) {
  const double z = 1e7;
  const auto a = wander_variance_weak(source(0.04, 1.0), kTurb, {z});
  const auto b = wander_variance_weak(source(0.04, 0.5), kTurb, {z});
  EXPECT_EQ(a.regime, WanderRegime::asymptotic_long);
  EXPECT_NEAR(b.rw2 / a.rw2, std::cbrt(std::sqrt(0.5)), 0.01 * std::cbrt(std::sqrt(0.5)));
}

TEST(ClassicWander, WorkedValueAndScaling) {
  EXPECT_NEAR(classic_wander(1e-15, 1e3, 0.02) / 5.61119003963049e-6, 1.0, 1e-12);
  EXPECT_EQ(classic_wander(0.0, 1e3, 0.02), 0.0);
  EXPECT_NEAR(classic_wander(1e-15, 2e3, 0.02) / classic_wander(1e-15, 1e3, 0.02), 8.0, 1e-12);
  EXPECT_THROW(classic_wander(1e-15, 0.0, 0.02), ParameterError);
  EXPECT_THROW(classic_wander(1e-15, 1e3, -0.02), ParameterError);
}

TEST(BeamRadius, OriginAndVacuumExample) {
  EXPECT_NEAR(beam_radius_squared(source(0.04), kTurb, {0.0}), 8e-4, 1e-18);
  const TurbulenceParams none{0.0, 2 * pi * 1e-3, 100};
  EXPECT_NEAR(beam_radius_squared(source(0.04), none, {1e4}), 8.0e-4 + 1.25e-3, 1e-15);
}

TEST(BeamRadius, TurbulenceTermMatchesBroadeningConstant) {
  const TurbulenceParams none{0.0, kTurb.inner_scale, 100};
  const double z = 7e3;
  const double term = beam_radius_squared(source(0.04), kTurb, {z}) -
                      beam_radius_squared(source(0.04), none, {z});
  EXPECT_NEAR(term / (2.232 * std::pow(kTurb.inner_scale, -1.0 / 3.0) * kTurb.cn2 * z * z * z), 1.0,
              1e-12);
  EXPECT_NEAR(term / turbulence_broadening(kTurb, z), 1.0, 1e-3);
}

TEST(BeamRadius, Monotonicity) {
  TurbulenceParams more = kTurb;
  more.cn2 *= 2;
  EXPECT_LT(beam_radius_squared(source(0.04), kTurb, {5e3}),
            beam_radius_squared(source(0.04), kTurb, {6e3}));
  EXPECT_LT(beam_radius_squared(source(0.04), kTurb, {5e3}),
            beam_radius_squared(source(0.04), more, {5e3}));
  EXPECT_GT(beam_radius_squared(source(0.04, 0.5), kTurb, {5e3}),
            beam_radius_squared(source(0.04, 1.0), kTurb, {5e3}));
}

TEST(StrongCondition, ZeroTurbulenceIsWeak) {
  const auto c = strong_turbulence_condition(source(0.04), {0.0, 2e-3, 100}, {1e4});
  EXPECT_FALSE(c.holds);
  EXPECT_EQ(c.margin, 0.0);
}

TEST(StrongCondition, StrongExampleAndLinearMargin) {
  TurbulenceParams t{5e-13, 2 * pi * 1e-3, 100};
  const auto c = strong_turbulence_condition(source(0.04), t, {1e4});
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.margin, 2947.54911319662, 1e-6);
  t.cn2 /= 5;
  EXPECT_NEAR(strong_turbulence_condition(source(0.04), t, {1e4}).margin / c.margin, 0.2, 1e-14);
}

TEST(CrossCorrelation, WorkedExample) {
  const TurbulenceParams t{1e-13, 2 * pi * 1e-3, 100};
  const auto e = cross_correlation_wander(source(0.04), t, {1e4});
  EXPECT_NEAR(e.rw2 / 2.20660107461169e-6, 1.0, 1e-12);
  EXPECT_FALSE(e.advisory_only);
}

TEST(CrossCorrelation, ScalingAndDomain) {
  TurbulenceParams t{1e-13, 2 * pi * 1e-3, 100};
  const double full = cross_correlation_wander(source(0.04, 1.0), t, {1e4}).rw2;
  const double half = cross_correlation_wander(source(0.04, 0.5), t, {1e4}).rw2;
  EXPECT_NEAR(half / full, 0.5, 1e-12);
  double prev = full;
  for (int i = 0; i < 5; ++i) {
    t.cn2 *= 4;
    const double v = cross_correlation_wander(source(0.04), t, {1e4}).rw2;
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_TRUE(cross_correlation_wander(source(0.04), {1e-18, 2e-3, 100}, {1e3}).advisory_only);
  EXPECT_THROW(cross_correlation_wander(source(0.04), {0.0, 2e-3, 100}, {1e4}), ParameterError);
}

TEST(Geometry, CarrierFrequencyAndDomain) {
  EXPECT_DOUBLE_EQ(carrier_frequency(source(0.04)), 299792458.0 * 1e7);
  EXPECT_THROW(GeometryParams{0.0}.validate(), ParameterError);
}
