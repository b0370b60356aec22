#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "oracles.hpp"
#include "sparsagg/dictionary.hpp"
#include "sparsagg/error.hpp"
#include "sparsagg/population.hpp"

using namespace sparsagg;

namespace {

double value_at(const Dictionary& d, std::size_t j, double x) { return d.value(j, std::span<const double>(&x, 1)); }

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST(Fourier, ConstantFirstFunction) { EXPECT_DOUBLE_EQ(value_at(build_fourier(3), 0, 0.7), 1.0); }

TEST(Fourier, CosineZeroAtQuarter) { EXPECT_NEAR(value_at(build_fourier(3), 1, 0.25), 0.0, 1e-15); }

TEST(Fourier, SineAtEighth) { EXPECT_NEAR(value_at(build_fourier(3), 2, 0.125), 1.0, 1e-15); }

TEST(Fourier, RejectsFewerThanTwoFunctions) {
  try {
    build_fourier(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_dictionary);
  }
}

TEST(Fourier, RejectsNonUnitDomainUnlessMapped) {
  EXPECT_THROW(Dictionary::fourier(3, Box::interval(0.0, 2.0)), Error);
  const Dictionary mapped = Dictionary::fourier(3, Box::interval(0.0, 2.0), true);
  EXPECT_NEAR(value_at(mapped, 1, 1.0), -std::sqrt(2.0), 1e-14);
}

TEST(Evaluate, FourierRows) {
  const DesignMatrix d = build_fourier(3).evaluate(column({0.0, 0.5}));
  const double s = std::sqrt(2.0);
  EXPECT_NEAR(d.values(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(d.values(0, 1), s, 1e-15);
  EXPECT_NEAR(d.values(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(d.values(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(d.values(1, 1), -s, 1e-15);
  EXPECT_NEAR(d.values(1, 2), 0.0, 1e-15);
}

TEST(Evaluate, CoordinateProjection) {
  const Dictionary d = Dictionary::coordinate(3, 2, Box{{-10, -10, -10}, {10, 10, 10}});
  Eigen::MatrixXd p(1, 3);
  p << 4, -1, 7;
  const DesignMatrix m = d.evaluate(p);
  ASSERT_EQ(m.cols(), 2);
  EXPECT_EQ(m.values(0, 0), 4.0);
  EXPECT_EQ(m.values(0, 1), -1.0);
}

TEST(Evaluate, TabulatedInterpolates) {
  const Dictionary d = Dictionary::tabulated({Table{{0, 1}, {0, 2}}, Table{{0, 1}, {1, 1}}});
  EXPECT_DOUBLE_EQ(d.evaluate(column({0.25})).values(0, 0), 0.5);
}

TEST(Evaluate, TabulatedClampsAndCounts) {
  const Dictionary d = Dictionary::tabulated({Table{{0.2, 0.8}, {1, 3}}, Table{{0, 1}, {1, 1}}});
  const DesignMatrix m = d.evaluate(column({0.1, 0.5, 0.9}));
  EXPECT_DOUBLE_EQ(m.values(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.values(2, 0), 3.0);
  EXPECT_EQ(m.clamped_points, 2u);
}

TEST(Evaluate, DimensionMismatchIsShapeError) {
  try {
    build_fourier(3).evaluate(Eigen::MatrixXd::Zero(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(Evaluate, Deterministic) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Random(200, 1).cwiseAbs();
  const Dictionary d = build_fourier(9);
  const Eigen::MatrixXd a = d.evaluate(p).values, b = d.evaluate(p).values;
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);
}

TEST(EmpiricalNorms, ConstantColumn) {
  DesignMatrix d{Eigen::MatrixXd::Ones(5, 1)};
  EXPECT_DOUBLE_EQ(empirical_norms(d)[0], 1.0);
}

TEST(EmpiricalNorms, Arithmetic) {
  DesignMatrix d{column({3, 4})};
  EXPECT_NEAR(empirical_norms(d)[0], std::sqrt(12.5), 1e-15);
}

TEST(EmpiricalNorms, FourierOnGridNearOne) {
  Eigen::MatrixXd p(1000, 1);
  for (int i = 0; i < 1000; ++i) p(i, 0) = (i + 0.5) / 1000.0;
  const Eigen::VectorXd norms = empirical_norms(build_fourier(3).evaluate(p));
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(norms[j], 1.0, 0.05);
}

TEST(EmpiricalNorms, SquaredTimesNIsColumnSumOfSquares) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Random(37, 1).cwiseAbs();
  const DesignMatrix d = build_fourier(6).evaluate(p);
  const Eigen::VectorXd norms = empirical_norms(d);
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) sum += d.values(i, j) * d.values(i, j);
    EXPECT_NEAR(norms[j] * norms[j] * 37.0, sum, 1e-12 * (1.0 + sum));
  }
}

TEST(ValidateA2, FourierAgainstIndependentQuadrature) {
  const DictionaryValidation v = validate_a2(build_fourier(3), MeasureSpec::uniform());
  // Independent Simpson oracle for each squared norm.
  const Dictionary d = build_fourier(3);
  double c0 = INFINITY, sup = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const auto f = [&](double x) { return value_at(d, j, x); };
    c0 = std::min(c0, std::sqrt(oracles::simpson([&](double x) { return f(x) * f(x); }, 0.0, 1.0)));
    sup = std::max(sup, oracles::grid_sup(f, 0.0, 1.0));
  }
  EXPECT_NEAR(v.min_norm, 1.0, 1e-6);
  EXPECT_NEAR(v.min_norm, c0, 1e-6);
  EXPECT_NEAR(v.sup_bound, std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(v.sup_bound, sup, 1e-6);
  EXPECT_TRUE(v.satisfied());
}

TEST(ValidateA2, ZeroFunctionFailsNormFlag) {
  const Dictionary d = Dictionary::tabulated({Table{{0, 1}, {0, 0}}, Table{{0, 1}, {1, 1}}});
  const DictionaryValidation v = validate_a2(d, MeasureSpec::uniform());
  EXPECT_EQ(v.min_norm, 0.0);
  EXPECT_FALSE(v.norms_bounded_below);
  EXPECT_FALSE(v.satisfied());
}

TEST(ValidateA2, TabulatedConstant) {
  const Dictionary d = Dictionary::tabulated({Table{{0, 1}, {2, 2}}, Table{{0, 1}, {2, 2}}});
  const DictionaryValidation v = validate_a2(d, MeasureSpec::uniform());
  EXPECT_NEAR(v.sup_bound, 2.0, 1e-12);
  EXPECT_NEAR(v.min_norm, 2.0, 1e-12);
  EXPECT_NEAR(v.fourth_moment, 16.0, 1e-10);
}

TEST(ValidateA2, FourthMomentBelowLToTheFourth) {
  for (std::size_t m : {2u, 5u, 17u}) {
    const DictionaryValidation v = validate_a2(build_fourier(m), MeasureSpec::uniform());
    EXPECT_LE(v.fourth_moment, std::pow(v.sup_bound, 4) * (1 + 1e-12));
  }
  const DictionaryValidation c =
      validate_a2(Dictionary::coordinate(3, 3, Box{{-1, 0, 2}, {1, 3, 5}}), MeasureSpec::uniform(Box{{-1, 0, 2}, {1, 3, 5}}));
  EXPECT_LE(c.fourth_moment, std::pow(c.sup_bound, 4));
}

TEST(ValidateA2, ThresholdsSetFlags) {
  ValidationThresholds t;
  t.max_sup = 1.0;
  const DictionaryValidation v = validate_a2(build_fourier(3), MeasureSpec::uniform(), t);
  EXPECT_FALSE(v.bounded);
}

TEST(Population, FourierGramIsIdentityUpTo65) {
  for (std::size_t m : {2u, 3u, 16u, 65u}) {
    const Population pop(build_fourier(m), MeasureSpec::uniform());
    const double dev = (pop.gram() - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    EXPECT_LT(dev, 1e-6) << "M=" << m;
  }
}

TEST(Population, CoordinateMomentsMatchSimpson) {
  const Box box{{-1, 0.5}, {2, 1.5}};
  const Population pop(Dictionary::coordinate(2, 2, box), MeasureSpec::uniform(box));
  const double e_x2 = oracles::simpson([](double x) { return x * x / 3.0; }, -1, 2);
  EXPECT_NEAR(pop.gram()(0, 0), e_x2, 1e-10);
  EXPECT_NEAR(pop.gram()(0, 1), 0.5 * 1.0, 1e-12);
  const double e_x4 = oracles::simpson([](double x) { return std::pow(x, 4) / 3.0; }, -1, 2);
  const double e_y4 = oracles::simpson([](double y) { return std::pow(y, 4); }, 0.5, 1.5);
  const double e_y2 = oracles::simpson([](double y) { return y * y; }, 0.5, 1.5);
  const double l0 = std::max({e_x4, e_y4, e_x2 * e_y2});
  EXPECT_NEAR(pop.fourth_moment(), l0, 1e-9);
  EXPECT_DOUBLE_EQ(pop.sup_bound(), 2.0);
}

TEST(Population, GridDensityNormalizesMass) {
  const MeasureSpec mu = MeasureSpec::grid_density({1.0, 3.0});
  const Population pop(build_fourier(2), mu);
  EXPECT_NEAR(pop.gram()(0, 0), 1.0, 1e-12);
  // density 0.5 + x on [0,1]
  const double cross = oracles::simpson(
      [](double x) { return std::sqrt(2.0) * std::cos(2 * std::numbers::pi * x) * (0.5 + x); }, 0, 1);
  EXPECT_NEAR(pop.gram()(0, 1), cross, 1e-6);
}

TEST(Measure, ResolutionMustBeAtLeast64) { EXPECT_THROW(MeasureSpec::uniform(Box::unit(1), 32).validate(), Error); }

TEST(Measure, GridDensitySamplesFollowDensity) {
  const MeasureSpec mu = MeasureSpec::grid_density({1.0, 3.0});
  Rng rng(5);
  const Eigen::MatrixXd x = sample_points(mu, 200000, rng);
  // E X under density 0.5 + x is 1/4 + 1/3.
  EXPECT_NEAR(x.mean(), 0.25 + 1.0 / 3.0, 3e-3);
  EXPECT_GE(x.minCoeff(), 0.0);
  EXPECT_LE(x.maxCoeff(), 1.0);
}

TEST(Parse, Shorthands) {
  EXPECT_EQ(parse_dictionary("fourier:5").size(), 5u);
  const Dictionary c = parse_dictionary("coordinate:4");
  EXPECT_EQ(c.kind(), DictionaryKind::coordinate);
  EXPECT_EQ(c.size(), 4u);
  EXPECT_EQ(c.dim(), 4u);
  EXPECT_THROW(parse_dictionary("wavelet:3"), Error);
  EXPECT_THROW(parse_dictionary("fourier"), Error);
}
