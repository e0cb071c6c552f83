#include "fms/errors.hpp"
#include "fms/mean_shift.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace fms;

namespace {

FunctionalSample bundles(std::size_t per, const std::vector<double>& centers, double sd, std::uint64_t seed,
                         std::size_t points = 31) {
  const auto g = Grid::uniform(0, 1, points);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sd);
  std::vector<Curve> cs;
  for (double c : centers)
    for (std::size_t i = 0; i < per; ++i) {
      const double a = c + nd(rng), b = nd(rng);
      cs.push_back(Curve::from_function(g, [a, b](double t) { return a + b * std::sin(3 * t); }));
    }
  return FunctionalSample(g, cs);
}

DensityModel model_of(const FunctionalSample& s, double h, const char* pair = "gaussian_gaussian") {
  return DensityModel(s, builtin_pair(pair), DistanceSpec::l2(), BandwidthRule::fixed(h), Normalization::none);
}

}  // namespace

TEST(Ascend, SingleDatumConvergesInOneStep) {
  const auto g = Grid::uniform(0, 1, 21);
  const auto c = Curve::from_function(g, [](double t) { return t * t; });
  const auto m = model_of(FunctionalSample(g, std::vector<Curve>{c}), 1.0);
  const auto t = ascend(m, c + Curve::constant(g, 0.2), MeanShiftConfig{});
  EXPECT_TRUE(t.converged);
  EXPECT_EQ(t.steps, 1);
  EXPECT_LE((t.terminal().values() - c.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ascend, TwoPointsMeetAtMidpoint) {
  const auto g = Grid::uniform(0, 1, 21);
  const auto a = Curve::constant(g, 0.0), b = Curve::constant(g, 0.2);
  const auto m = model_of(FunctionalSample(g, std::vector<Curve>{a, b}), 10.0, "uniform_epanechnikov");
  const auto t = ascend(m, a, MeanShiftConfig{});
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.terminal().values()[3], 0.1, 1e-15);
}

TEST(Ascend, OutsideSupport) {
  const auto g = Grid::uniform(0, 1, 21);
  const auto m = model_of(FunctionalSample(g, std::vector<Curve>{Curve::constant(g, 0.0)}), 0.5);
  const auto t = ascend(m, Curve::constant(g, 3.0), MeanShiftConfig{});
  EXPECT_TRUE(t.outside_support);
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.iterates.size(), 1u);
}

TEST(Ascend, IterateIsWeightedMean) {
  const auto s = bundles(8, {0.0, 0.6}, 0.2, 5);
  const auto m = model_of(s, 0.5, "epanechnikov_biweight");
  MeanShiftConfig cfg;
  cfg.max_iters = 20;
  const auto t = ascend(m, s.curve(0), cfg);
  const auto& w = s.grid()->points();
  for (std::size_t it = 0; it + 1 < t.iterates.size(); ++it) {
    const auto& x = t.iterates[it].values();
    Eigen::VectorXd num = Eigen::VectorXd::Zero(x.size());
    double den = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Eigen::VectorXd d = s.values().row(static_cast<Eigen::Index>(i)).transpose() - x;
      double sq = 0.0;
      for (std::size_t j = 0; j + 1 < w.size(); ++j)
        sq += 0.5 * (w[j + 1] - w[j]) * (d[j] * d[j] + d[j + 1] * d[j + 1]);
      const double u = std::sqrt(sq) / 0.5;
      const double k = u <= 1.0 ? 1.5 * (1 - u * u) : 0.0;
      num += k * s.values().row(static_cast<Eigen::Index>(i)).transpose();
      den += k;
    }
    EXPECT_LE((t.iterates[it + 1].values() - num / den).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Ascend, StopsAtTolerance) {
  const auto s = bundles(10, {0.0}, 0.3, 6);
  const auto m = model_of(s, 0.8);
  MeanShiftConfig cfg;
  cfg.tolerance = 1e-9;
  const auto t = ascend(m, s.curve(3), cfg);
  ASSERT_TRUE(t.converged);
  const auto ms = mean_shift_vector(m, t.terminal());
  EXPECT_LE(std::sqrt(inner_product(*ms, *ms, DistanceSpec::l2())), 1e-9 * (1 + 1e-9));
}

TEST(Ascend, ConfigValidation) {
  const auto s = bundles(3, {0.0}, 0.1, 1);
  const auto m = model_of(s, 1.0);
  MeanShiftConfig cfg;
  cfg.max_iters = 0;
  EXPECT_THROW(ascend(m, s.curve(0), cfg), InputError);
  cfg = MeanShiftConfig{};
  cfg.tolerance = -1.0;
  EXPECT_THROW(cluster(m, cfg), InputError);
  const auto other = Grid::uniform(0, 2, 31);
  EXPECT_THROW(ascend(m, Curve::constant(other, 0.0), MeanShiftConfig{}), InputError);
}

TEST(Cluster, IdenticalCurvesGiveOneMode) {
  const auto g = Grid::uniform(0, 1, 21);
  const auto c = Curve::from_function(g, [](double t) { return std::cos(t); });
  const auto ms = cluster(model_of(FunctionalSample(g, std::vector<Curve>(6, c)), 0.3), MeanShiftConfig{});
  ASSERT_EQ(ms.count(), 1u);
  EXPECT_EQ(ms.sizes[0], 6u);
  EXPECT_FALSE(ms.atomic_flags[0]);
  EXPECT_TRUE(ms.stability_flags[0]);
  EXPECT_LE((ms.modes[0].values() - c.values()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Cluster, TwoBundles) {
  const auto s = bundles(15, {0.0, 3.0}, 0.1, 7);
  const auto ms = cluster(model_of(s, 0.6), MeanShiftConfig{});
  ASSERT_EQ(ms.count(), 2u);
  EXPECT_EQ(ms.sizes[0], 15u);
  EXPECT_EQ(ms.sizes[1], 15u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(ms.assignments[i], i < 15 ? 0 : 1);
  EXPECT_EQ(ms.nonatomic_count(), 2u);
  EXPECT_EQ(ms.clustered_count(), 30u);
  EXPECT_TRUE(ms.stability_flags[0] && ms.stability_flags[1]);
  EXPECT_TRUE(std::all_of(ms.converged.begin(), ms.converged.end(), [](bool b) { return b; }));
}

TEST(Cluster, OutlierIsAtomic) {
  const auto base = bundles(12, {0.0}, 0.1, 8);
  Eigen::MatrixXd v(13, base.values().cols());
  v.topRows(12) = base.values();
  v.row(12).setConstant(20.0);
  const FunctionalSample s(base.grid(), v);
  const auto ms = cluster(model_of(s, 0.6, "epanechnikov_biweight"), MeanShiftConfig{});
  ASSERT_EQ(ms.count(), 2u);
  EXPECT_TRUE(ms.atomic_flags[1]);
  EXPECT_EQ(ms.nonatomic_count(), 1u);
  EXPECT_EQ(ms.clustered_count(), 12u);
  EXPECT_EQ(ms.unclustered_count(), 0u);
}

TEST(Cluster, ExplicitStartsOutsideSupport) {
  const auto s = bundles(5, {0.0}, 0.05, 9);
  const auto g = s.grid();
  const std::vector<Curve> starts{Curve::constant(g, 0.0), Curve::constant(g, 50.0)};
  const auto ms = cluster(model_of(s, 0.5, "biweight_triweight"), MeanShiftConfig{}, starts);
  EXPECT_EQ(ms.assignments, (std::vector<int>{0, -1}));
  EXPECT_EQ(ms.unclustered_count(), 1u);
}

TEST(Cluster, Trajectories) {
  const auto s = bundles(6, {0.0, 2.0}, 0.1, 10);
  MeanShiftConfig cfg;
  cfg.keep_trajectories = true;
  const auto ms = cluster(model_of(s, 0.5), cfg);
  ASSERT_EQ(ms.trajectories.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    const auto& t = ms.trajectories[i];
    EXPECT_EQ(t.start().values(), s.values().row(static_cast<Eigen::Index>(i)).transpose());
    EXPECT_EQ(static_cast<int>(*t.mode), ms.assignments[i]);
    EXPECT_EQ(t.iterates.size(), static_cast<std::size_t>(t.steps) + 1);
  }
}

TEST(Cluster, SerialMatchesParallel) {
  const auto s = bundles(20, {0.0, 1.0, 2.5}, 0.25, 11);
  const auto m = model_of(s, 0.45);
  MeanShiftConfig cfg;
  cfg.seed = 3;
  const auto a = cluster(m, cfg, std::nullopt, Execution::serial);
  const auto b = cluster(m, cfg, std::nullopt, Execution::parallel);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.stability_flags, b.stability_flags);
  ASSERT_EQ(a.count(), b.count());
  for (std::size_t j = 0; j < a.count(); ++j) EXPECT_EQ(a.modes[j].values(), b.modes[j].values());
  const auto c = cluster(m, cfg, std::nullopt, Execution::parallel);
  EXPECT_EQ(b.assignments, c.assignments);
}

TEST(Cluster, PermutationInvariantPartition) {
  const auto s = bundles(10, {0.0, 2.0}, 0.2, 12);
  std::vector<std::size_t> perm(s.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  const auto a = cluster(model_of(s, 0.5), MeanShiftConfig{});
  const auto b = cluster(model_of(s.subset(perm), 0.5), MeanShiftConfig{});
  ASSERT_EQ(a.count(), b.count());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      EXPECT_EQ(a.assignments[perm[i]] == a.assignments[perm[j]], b.assignments[i] == b.assignments[j]);
}

TEST(Blurring, ContractsBundleAndKeepsShape) {
  const auto s = bundles(8, {0.0, 5.0}, 0.2, 13);
  const auto m = model_of(s, 0.8);
  const auto once = blurring_pass(m);
  EXPECT_EQ(once.size(), s.size());
  const auto many = blurring(m, 30);
  for (std::size_t i = 1; i < 8; ++i) {
    EXPECT_LT((many.values().row(i) - many.values().row(0)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((many.values().row(8 + i) - many.values().row(8)).cwiseAbs().maxCoeff(), 1e-6);
  }
  EXPECT_GT(std::abs(many.values()(0, 0) - many.values()(8, 0)), 4.0);
  EXPECT_EQ(blurring(m, 0).values(), s.values());
  EXPECT_THROW(blurring(m, -1), InputError);
}

TEST(Blurring, PassMovesEachCurveByItsShift) {
  const auto s = bundles(6, {0.0}, 0.3, 14);
  const auto m = model_of(s, 0.7);
  const auto next = blurring_pass(m);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto x = s.curve(i);
    const auto shift = *mean_shift_vector(m, x);
    EXPECT_LE((next.values().row(static_cast<Eigen::Index>(i)).transpose() - (x + shift).values()).cwiseAbs().maxCoeff(),
              1e-13);
  }
}
