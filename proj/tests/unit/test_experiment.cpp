#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "beamwander/experiment.hpp"

using namespace beamwander;

namespace {

constexpr double pi = std::numbers::pi;

RealField gaussian(const SimGrid &g, double w, double x0 = 0.0) {
  RealField f(g.n);
  for (std::size_t j = 0; j < g.n; ++j)
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.coord(i) - x0, y = g.coord(j);
      f(j, i) = std::exp(-(x * x + y * y) / (w * w));
    }
  return f;
}

ExperimentConfig small_wave_config() {
  ExperimentConfig c;
  c.src = {0.04, 1e7, kInfinity};
  c.turb = TurbulenceParams::from_reduced_inner_scale(0.0, 1e-3, 100);
  c.geom = {2e3};
  c.plan = PropagationPlan::equispaced(2e3, 10);
  c.grid = SimGrid::from_window(128, 0.5);
  c.n_atm = 4;
  c.n_src = 4;
  return c;
}

} // namespace

TEST(Centroid, SymmetricGaussianIsCentred) {
  const SimGrid g{128, 1e-3};
  const auto c = centroid(gaussian(g, 0.01), g);
  EXPECT_LT(std::abs(c[0]), 1e-12 * g.window());
  EXPECT_LT(std::abs(c[1]), 1e-12 * g.window());
}

TEST(Centroid, SinglePixel) {
  const SimGrid g{64, 2e-3};
  RealField f(g.n);
  f(10, 50) = 3.0;
  const auto c = centroid(f, g);
  EXPECT_DOUBLE_EQ(c[0], g.coord(50));
  EXPECT_DOUBLE_EQ(c[1], g.coord(10));
}

TEST(Centroid, TranslatedGaussian) {
  const SimGrid g{128, 1e-3};
  const auto base = gaussian(g, 0.01);
  RealField shifted(g.n);
  const std::size_t k = 7;
  for (std::size_t j = 0; j < g.n; ++j)
    for (std::size_t i = k; i < g.n; ++i)
      shifted(j, i) = base(j, i - k);
  const auto c = centroid(shifted, g);
  EXPECT_NEAR(c[0], k * g.dx, g.dx / 100);
  EXPECT_NEAR(c[1], 0.0, g.dx / 100);
}

TEST(Centroid, ZeroIntensityIsDegenerate) {
  const SimGrid g{64, 1e-3};
  EXPECT_THROW(centroid(RealField(g.n), g), DegenerateInputError);
  EXPECT_THROW(mean_square_radius(RealField(g.n), g, RadiusReference::axis), DegenerateInputError);
}

TEST(MeanSquareRadius, InitialBeamAndParallelAxis) {
  const SimGrid g{256, 2e-3};
  const auto I = initial_field(g, {0.04, 1e7, kInfinity}).intensity();
  EXPECT_NEAR(mean_square_radius(I, g, RadiusReference::axis) / 8e-4, 1.0, 0.005);

  const auto off = gaussian(g, 0.03, 0.05);
  const auto c = centroid(off, g);
  EXPECT_NEAR(mean_square_radius(off, g, RadiusReference::axis),
              mean_square_radius(off, g, RadiusReference::centroid) + c[0] * c[0] + c[1] * c[1],
              1e-14);
  EXPECT_NEAR(mean_square_radius(off, g, RadiusReference::centroid),
              mean_square_radius(gaussian(g, 0.03), g, RadiusReference::centroid), 1e-9);
}

TEST(WanderExperiment, NoTurbulenceNoWander) {
  auto c = small_wave_config();
  const auto s = run_wander_experiment(c);
  EXPECT_LE(s.rw2_mean, 1e-10 * c.src.r0 * c.src.r0);
  EXPECT_TRUE(s.diagnostics.valid);
  EXPECT_FALSE(s.diagnostics.enough_realizations);
  EXPECT_NEAR(s.rb2_longterm / s.rb2_analytic, 1.0, 0.01);
  EXPECT_TRUE(s.decomposition_holds());
}

TEST(WanderExperiment, SeedDeterminismAcrossWorkerCounts) {
  auto c = small_wave_config();
  c.turb.cn2 = 1e-15;
  c.workers = 1;
  const auto a = run_wander_experiment(c);
  c.workers = 3;
  const auto b = run_wander_experiment(c);
  EXPECT_EQ(a.rw2_mean, b.rw2_mean);
  EXPECT_EQ(a.rb2_longterm, b.rb2_longterm);
  EXPECT_EQ(a.rb2_shortterm, b.rb2_shortterm);
  EXPECT_GT(a.rw2_mean, 0.0);
  c.master_seed = 2;
  EXPECT_NE(run_wander_experiment(c).rw2_mean, a.rw2_mean);
}

TEST(WanderExperiment, CoherentSourceIgnoresSourceCount) {
  auto c = small_wave_config();
  c.turb.cn2 = 1e-15;
  c.n_src = 1;
  const auto a = run_wander_experiment(c);
  c.n_src = 8;
  const auto b = run_wander_experiment(c);
  EXPECT_EQ(a.rw2_mean, b.rw2_mean);
  EXPECT_EQ(a.rb2_longterm, b.rb2_longterm);
}

TEST(WanderExperiment, FiniteSourceEnsembleNoiseIsRemoved) {
  // Without turbulence the slow-detector centroid is zero by symmetry; with 6 source
  // screens per atmosphere the raw centroid scatters and the correction must cancel it.
  auto c = small_wave_config();
  c.grid = SimGrid::from_window(256, 1.0);
  c.src.lambda_c = coherence_length_for_ratio(0.04, 0.5);
  c.n_src = 6;
  c.n_atm = 30;
  const auto s = run_wander_experiment(c);
  EXPECT_LE(s.rw2_mean, 3 * s.rw2_se);
  EXPECT_TRUE(s.decomposition_holds());
}

TEST(WanderExperiment, WindowBelowEightBeamRadiiRejected) {
  auto c = small_wave_config();
  c.grid = SimGrid::from_window(128, 0.2);
  EXPECT_THROW(run_wander_experiment(c), ResolutionError);
}

TEST(WanderExperiment, KineticZeroTurbulenceIsExactlyZero) {
  auto c = small_wave_config();
  c.estimator = Estimator::kinetic;
  c.n_atm = 30;
  const auto s = run_wander_experiment(c);
  EXPECT_EQ(s.rw2_mean, 0.0);
  EXPECT_EQ(s.n_src, 2 * c.kinetic.ray_pairs);
  EXPECT_TRUE(s.decomposition_holds());
}

TEST(WanderExperiment, KineticDecompositionAndDeterminism) {
  auto c = small_wave_config();
  c.estimator = Estimator::kinetic;
  c.turb.cn2 = 1e-14;
  c.n_atm = 40;
  c.workers = 1;
  const auto a = run_wander_experiment(c);
  c.workers = 2;
  const auto b = run_wander_experiment(c);
  EXPECT_EQ(a.rw2_mean, b.rw2_mean);
  EXPECT_GT(a.rw2_mean, 0.0);
  EXPECT_TRUE(a.decomposition_holds());
  EXPECT_GE(a.rb2_longterm, a.rb2_shortterm);
}

TEST(Sweep, RowOrderAndZeroPoint) {
  auto c = small_wave_config();
  c.estimator = Estimator::kinetic;
  c.n_atm = 30;
  const auto rows = sweep_cn2(c, {0.0, 1e-15}, {1.0, 0.5});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].r1_ratio, 1.0);
  EXPECT_EQ(rows[1].r1_ratio, 1.0);
  EXPECT_EQ(rows[2].r1_ratio, 0.5);
  EXPECT_EQ(rows[0].cn2, 0.0);
  EXPECT_EQ(rows[3].cn2, 1e-15);
  EXPECT_EQ(rows[0].stats.ratio(), 0.0);
  for (const auto &r : rows)
    EXPECT_EQ(r.status, "ok");
}

TEST(Sweep, FailuresAreRecordedPerRow) {
  auto c = small_wave_config();
  c.n_atm = 2;
  c.n_src = 2;
  // ratio 0.05 needs lambda_c ≈ 1.3 cm, below 4 pixels of this 3.9 mm grid.
  const auto rows = sweep_cn2(c, {0.0}, {1.0, 0.05});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].ok());
  EXPECT_TRUE(rows[1].status.starts_with("error"));
  EXPECT_THROW(sweep_cn2(c, {1e-15, 1e-16}, {1.0}), ParameterError);
  EXPECT_THROW(sweep_cn2(c, {}, {1.0}), ParameterError);
}
