#include "fms/errors.hpp"
#include "fms/function_space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fms;

namespace {

constexpr double pi = std::numbers::pi;

// Composite Simpson rule on an odd-length uniform grid.
double simpson(const Eigen::VectorXd& f, double h) {
  const auto n = f.size();
  double s = f[0] + f[n - 1];
  for (Eigen::Index i = 1; i < n - 1; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

Curve random_smooth(const GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const double a = nd(rng), b = nd(rng), c = nd(rng), d = nd(rng);
  return Curve::from_function(g, [&](double t) { return a + b * t + c * std::sin(3 * t + d) + 0.3 * std::cos(7 * t); });
}

}  // namespace

TEST(Grid, RejectsShortOrUnorderedGrids) {
  EXPECT_THROW(Grid({0.0}), InputError);
  EXPECT_THROW(Grid({0.0, 0.5, 0.25}), InputError);
  EXPECT_THROW(Grid({0.0, 0.0, 1.0}), InputError);
  EXPECT_NO_THROW(Grid({0.0, 0.1, 0.7, 1.0}));
}

TEST(Grid, TrapezoidWeightsSumToLength) {
  const auto g = Grid::make({0.0, 0.1, 0.35, 0.9, 2.0});
  EXPECT_NEAR(g->weights().sum(), 2.0, 1e-15);
}

TEST(Curve, RejectsWrongLengthAndNonFinite) {
  const auto g = Grid::uniform(0, 1, 5);
  EXPECT_THROW(Curve(g, Eigen::VectorXd::Zero(4)), InputError);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
  v[2] = std::nan("");
  EXPECT_THROW(Curve(g, v), InputError);
}

TEST(InnerProduct, ConstantHasUnitNorm) {
  const auto g = Grid::uniform(0, 1, 11);
  const auto one = Curve::constant(g, 1.0);
  EXPECT_DOUBLE_EQ(inner_product(one, one, DistanceSpec::l2()), 1.0);
}

TEST(InnerProduct, SineCosineOrthogonal) {
  const auto g = Grid::uniform(0, 1, 201);
  const auto s = Curve::from_function(g, [](double t) { return std::sin(2 * pi * t); });
  const auto c = Curve::from_function(g, [](double t) { return std::cos(2 * pi * t); });
  EXPECT_NEAR(inner_product(s, c, DistanceSpec::l2()), 0.0, 1e-6);
}

TEST(InnerProduct, SobolevOfIdentity) {
  const auto g = Grid::uniform(0, 1, 201);
  const auto t = Curve::from_function(g, [](double x) { return x; });
  EXPECT_NEAR(inner_product(t, t, DistanceSpec::sobolev_h1()), 4.0 / 3.0, 1e-4);
  EXPECT_NEAR(inner_product(t, t, DistanceSpec::sobolev_h1_induced()), 4.0 / 3.0, 1e-4);
}

TEST(InnerProduct, AgreesWithSimpsonOracle) {
  std::mt19937_64 rng(11);
  for (std::size_t m : {51u, 101u, 201u}) {
    const auto g = Grid::uniform(0, 2, m);
    const double h = 2.0 / static_cast<double>(m - 1);
    for (int rep = 0; rep < 10; ++rep) {
      const auto a = random_smooth(g, rng), b = random_smooth(g, rng);
      const double oracle = simpson(a.values().cwiseProduct(b.values()), h);
      const double scale = std::max(1.0, std::abs(oracle));
      // trapezoid error is O(h^2) with the second derivative of the product bounded by ~60 here
      EXPECT_NEAR(inner_product(a, b, DistanceSpec::l2()), oracle, 10.0 * h * h * scale);
    }
  }
}

TEST(InnerProduct, SymmetricAndBilinear) {
  std::mt19937_64 rng(5);
  const auto g = Grid::make({0.0, 0.05, 0.2, 0.33, 0.5, 0.61, 0.8, 0.95, 1.0});
  for (const auto& spec : {DistanceSpec::l2(), DistanceSpec::sobolev_h1(), DistanceSpec::derivative_l2(1)}) {
    const auto a = random_smooth(g, rng), b = random_smooth(g, rng), c = random_smooth(g, rng);
    EXPECT_NEAR(inner_product(a, b, spec), inner_product(b, a, spec), 1e-12);
    EXPECT_NEAR(inner_product(2.0 * a + c, b, spec), 2.0 * inner_product(a, b, spec) + inner_product(c, b, spec),
                1e-10);
  }
}

TEST(InnerProduct, GridMismatchThrows) {
  const auto a = Curve::constant(Grid::uniform(0, 1, 5), 1.0);
  const auto b = Curve::constant(Grid::uniform(0, 1, 6), 1.0);
  EXPECT_THROW(inner_product(a, b, DistanceSpec::l2()), InputError);
  EXPECT_THROW(distance(a, b, DistanceSpec::l2()), InputError);
}

TEST(Distance, IdentityIsZero) {
  std::mt19937_64 rng(3);
  const auto g = Grid::uniform(0, 1, 41);
  const auto x = random_smooth(g, rng);
  for (const auto& spec : {DistanceSpec::l2(), DistanceSpec::sobolev_h1(), DistanceSpec::sobolev_h1_induced(),
                           DistanceSpec::derivative_l2(1), DistanceSpec::derivative_l2(2)})
    EXPECT_EQ(distance(x, x, spec), 0.0);
}

TEST(Distance, DerivativeDistanceIgnoresVerticalShift) {
  std::mt19937_64 rng(8);
  const auto g = Grid::uniform(0, 1, 61);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = random_smooth(g, rng);
    const auto y = x + Curve::constant(g, std::normal_distribution<double>(0, 5)(rng));
    EXPECT_LE(distance(x, y, DistanceSpec::derivative_l2(1)), 1e-10);
    EXPECT_LE(distance(x, y, DistanceSpec::derivative_l2(1, LocalPolynomial{2, 0.05})), 1e-10);
  }
}

TEST(Distance, SineNorm) {
  const auto g = Grid::uniform(0, 1, 2001);
  const auto zero = Curve::constant(g, 0.0);
  const auto s = Curve::from_function(g, [](double t) { return std::sin(2 * pi * t); });
  EXPECT_NEAR(distance(zero, s, DistanceSpec::l2()), 1.0 / std::sqrt(2.0), 1e-4);
}

TEST(Distance, SobolevIsSumOfNorms) {
  const auto g = Grid::uniform(0, 1, 201);
  const auto zero = Curve::constant(g, 0.0);
  const auto t = Curve::from_function(g, [](double x) { return x; });
  // ||t|| = 1/sqrt(3), ||t'|| = 1
  EXPECT_NEAR(distance(zero, t, DistanceSpec::sobolev_h1()), 1.0 / std::sqrt(3.0) + 1.0, 1e-4);
  EXPECT_NEAR(distance(zero, t, DistanceSpec::sobolev_h1_induced()), std::sqrt(4.0 / 3.0), 1e-4);
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(21);
  const auto g = Grid::uniform(0, 1, 31);
  std::normal_distribution<double> nd;
  auto noise = [&] {
    Eigen::VectorXd v(31);
    for (auto& x : v) x = nd(rng);
    return Curve(g, v);
  };
  for (const auto& spec : {DistanceSpec::l2(), DistanceSpec::derivative_l2(1), DistanceSpec::derivative_l2(2),
                           DistanceSpec::sobolev_h1()}) {
    for (int rep = 0; rep < 200; ++rep) {
      const auto a = noise(), b = noise(), c = noise();
      const double ab = distance(a, b, spec), bc = distance(b, c, spec), ac = distance(a, c, spec);
      EXPECT_LE(ac, (ab + bc) * (1 + 1e-10));
      EXPECT_NEAR(ab, distance(b, a, spec), 1e-12 * std::max(1.0, ab));
    }
  }
}

TEST(DistanceSpec, DerivativeKindsNeedMethod) {
  DistanceSpec s{DistanceKind::SobolevH1, 1, std::nullopt};
  EXPECT_THROW(s.validate(), InputError);
  DistanceSpec d{DistanceKind::DerivativeL2, 3, FiniteDifference{}};
  EXPECT_THROW(d.validate(), InputError);
}

TEST(Derivative, ConstantGivesZero) {
  const auto g = Grid::uniform(0, 1, 21);
  const auto c = Curve::constant(g, 4.2);
  EXPECT_LE(estimate_derivative(c, 1, FiniteDifference{}).values().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(estimate_derivative(c, 2, FiniteDifference{}).values().cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE(estimate_derivative(c, 1, LocalPolynomial{2, 0.1}).values().cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Derivative, FiniteDifferenceOfSquare) {
  const auto g = Grid::uniform(0, 1, 101);
  const auto sq = Curve::from_function(g, [](double t) { return t * t; });
  const auto d = estimate_derivative(sq, 1, FiniteDifference{});
  for (std::size_t i = 1; i + 1 < g->size(); ++i) EXPECT_NEAR(d.values()[static_cast<Eigen::Index>(i)], 2 * (*g)[i], 1e-2);
}

TEST(Derivative, FiniteDifferenceOnNonUniformGrid) {
  const auto g = Grid::make({0.0, 0.07, 0.1, 0.22, 0.3, 0.41, 0.5, 0.66, 0.8, 1.0});
  const auto q = Curve::from_function(g, [](double t) { return 3 * t * t - t + 2; });
  const auto d1 = estimate_derivative(q, 1, FiniteDifference{});
  const auto d2 = estimate_derivative(q, 2, FiniteDifference{});
  for (std::size_t i = 0; i < g->size(); ++i) {
    EXPECT_NEAR(d1.values()[static_cast<Eigen::Index>(i)], 6 * (*g)[i] - 1, 1e-9);
    EXPECT_NEAR(d2.values()[static_cast<Eigen::Index>(i)], 6.0, 1e-8);
  }
}

TEST(Derivative, LocalPolynomialSecondDerivativeOfCube) {
  const auto g = Grid::uniform(0, 1, 101);
  const auto cube = Curve::from_function(g, [](double t) { return t * t * t; });
  const auto d = estimate_derivative(cube, 2, LocalPolynomial{2, 0.03});
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double t = (*g)[i];
    if (t < 0.15 || t > 0.85) continue;
    EXPECT_NEAR(d.values()[static_cast<Eigen::Index>(i)], 6 * t, 0.05 * 6 * t);
  }
}

TEST(Derivative, Errors) {
  const auto g = Grid::uniform(0, 1, 21);
  const auto c = Curve::constant(g, 1.0);
  EXPECT_THROW(estimate_derivative(c, 3, LocalPolynomial{2, 0.1}), InputError);
  EXPECT_THROW(estimate_derivative(c, 3, FiniteDifference{}), InputError);
  const auto tiny = Grid::uniform(0, 1, 2);
  EXPECT_THROW(estimate_derivative(Curve::constant(tiny, 1.0), 1, FiniteDifference{}), InputError);
  EXPECT_THROW(estimate_derivative(c, 1, LocalPolynomial{2, 1e-4}), InputError);
}

TEST(LinearCombination, Basics) {
  const auto g = Grid::uniform(0, 1, 11);
  const auto t = Curve::from_function(g, [](double x) { return x; });
  const auto y = Curve::from_function(g, [](double x) { return std::exp(x); });
  std::vector<Curve> cs{t, y};
  const std::vector<double> w1{1.0, 0.0};
  EXPECT_EQ(linear_combination(w1, cs).values(), t.values());
  std::vector<Curve> tt{t, t};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_TRUE(linear_combination(half, tt).values().isApprox(t.values(), 1e-15));
  const std::vector<double> w3{2.0, -1.0};
  EXPECT_TRUE(linear_combination(w3, tt).values().isApprox(t.values(), 1e-15));
  const std::vector<double> bad{1.0};
  EXPECT_THROW(linear_combination(bad, cs), InputError);
}

TEST(FunctionalSample, SubsetKeepsLabels) {
  const auto g = Grid::uniform(0, 1, 3);
  Eigen::MatrixXd v(3, 3);
  v << 0, 1, 2, 3, 4, 5, 6, 7, 8;
  FunctionalSample s(g, v, {"a", "b", "c"});
  const std::vector<std::size_t> idx{2, 0, 2};
  const auto sub = s.subset(idx);
  EXPECT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.labels()[0], "c");
  EXPECT_EQ(sub.values()(1, 1), 1.0);
  EXPECT_THROW(FunctionalSample(g, v, {"a"}), InputError);
}
