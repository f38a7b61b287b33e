#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "specdiff/density.hpp"
#include "specdiff/fit.hpp"

using namespace specdiff;

namespace {
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

BandSet random_bands(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> edge(0.02, 1.0);
  std::vector<double> e(static_cast<std::size_t>(count(rng)));
  for (double& a : e) a = edge(rng);
  return BandSet(e);
}
}  // namespace

TEST(BandSetType, SortsAndDropsBelowFloor) {
  const BandSet b({0.3, 1e-8, 0.9, 0.5});
  EXPECT_EQ(b.edges(), (std::vector<double>{0.9, 0.5, 0.3}));
  EXPECT_TRUE(BandSet({1e-7}).empty());
  EXPECT_EQ(BandSet({1e-7}, 1e-9).edges().size(), 1u);
  EXPECT_THROW(BandSet({1.2}), std::invalid_argument);
  EXPECT_THROW(BandSet({-0.1}), std::invalid_argument);
  EXPECT_THROW(BandSet({std::nan("")}), std::invalid_argument);
}

TEST(Mu, Examples) {
  EXPECT_NEAR(mu(BandSet({1.0}), 1.0 / std::sqrt(2.0)), 2.0 / kPi2, 1e-14);
  EXPECT_NEAR(2.0 / kPi2, 0.202642, 1e-6);
  EXPECT_EQ(mu(BandSet({0.5}), 0.8), 0.0);
  EXPECT_THROW(mu(BandSet({0.5}), 0.0), std::domain_error);
  EXPECT_THROW(mu(BandSet({0.5}), 1.0), std::domain_error);
}

TEST(Mu, EvenAndAdditive) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const BandSet a = random_bands(rng), b = random_bands(rng);
    for (double y : {0.01, 0.15, 0.4, 0.66, 0.95}) {
      EXPECT_EQ(mu(a, y), mu(a, -y));
      EXPECT_NEAR(mu(a + b, y), mu(a, y) + mu(b, y), 1e-12 * (1 + mu(a + b, y)));
    }
  }
}

TEST(BandCountSlope, Examples) {
  // (1/π²)·arccosh(2)
  EXPECT_NEAR(band_count_slope(BandSet({0.8}), 0.4), std::acosh(2.0) / kPi2, 1e-15);
  EXPECT_NEAR(band_count_slope(BandSet({0.8}), 0.4), 0.133436, 1e-6);
  EXPECT_EQ(band_count_slope(BandSet({0.5}), 0.6), 0.0);
  EXPECT_EQ(band_count_slope(BandSet({0.37}), 0.37), 0.0);
  EXPECT_EQ(band_count_slope(BandSet(), 0.2), 0.0);
  EXPECT_THROW(band_count_slope(BandSet({0.5}), 0.0), std::domain_error);
}

TEST(BandCountSlope, MatchesDirectQuadratureOfMu) {
  std::mt19937_64 rng(2);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (int t = 0; t < 20; ++t) {
    const BandSet bands = random_bands(rng);
    for (double b : {0.1, 0.3, 0.5}) {
      double direct = 0.0;
      for (double a : bands.edges())
        if (a > b)
          direct += ts.integrate([&](double y, double yc) {
          const double d = yc > 0 ? yc : a - y;  // distance to the singular end
          return a / (y * std::sqrt(d * (a + y)));
        }, b, a) / kPi2;
      EXPECT_NEAR(direct, band_count_slope(bands, b), 1e-8);
    }
  }
}

TEST(SechMoment, KnownValues) {
  EXPECT_NEAR(sech_moment(1), std::numbers::pi, 1e-12);
  EXPECT_NEAR(sech_moment(2), 2.0, 1e-12);
  EXPECT_NEAR(sech_moment(3), std::numbers::pi / 2.0, 1e-12);
  EXPECT_NEAR(sech_moment(4), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(sech_moment(6), 16.0 / 15.0, 1e-12);
  EXPECT_THROW(sech_moment(0), std::invalid_argument);
}

TEST(DeltaM, Examples) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(delta_m(random_bands(rng), 3), 0.0);
  EXPECT_NEAR(delta_m(BandSet({0.6}), 2), 0.72 / kPi2, 1e-13);
  EXPECT_NEAR(0.72 / kPi2, 0.072951, 1e-6);
  EXPECT_NEAR(delta_m(BandSet({1.0}), 2), 2.0 / kPi2, 1e-13);
  EXPECT_THROW(delta_m(BandSet({1.0}), 0), std::invalid_argument);
}

TEST(RhsIntegral, PowerMatchesDeltaM) {
  const BandSet bands({0.9, 0.45, 0.2});
  // g(y) = y² vanishes fast enough that a tiny η loses < 1e-12
  const TestFunction sq{[](double y) { return y * y; }, 1e-9, {}};
  EXPECT_NEAR(rhs_integral(bands, sq), delta_m(bands, 2), 1e-9);
  const TestFunction quartic{[](double y) { return std::pow(y, 4); }, 1e-9, {}};
  EXPECT_NEAR(rhs_integral(bands, quartic), delta_m(bands, 4), 1e-10);
}

TEST(RhsIntegral, IndicatorMatchesBandCountSlope) {
  const BandSet bands({0.95, 0.6, 0.33});
  for (double b : {0.1, 0.3, 0.5, 0.7}) {
    const TestFunction ind{[b](double y) { return y > b ? 1.0 : 0.0; }, b, {b}};
    EXPECT_NEAR(rhs_integral(bands, ind), band_count_slope(bands, b), 1e-10) << b;
  }
}

TEST(RhsIntegral, ZeroAndOddVanish) {
  std::mt19937_64 rng(4);
  const TestFunction zero{[](double) { return 0.0; }, 0.1, {}};
  EXPECT_EQ(rhs_integral(BandSet({0.8}), zero), 0.0);
  for (int t = 0; t < 10; ++t) {
    const BandSet bands = random_bands(rng);
    const TestFunction odd{[](double y) { return std::abs(y) > 0.15 ? std::sin(7 * y) + y * y * y : 0.0; }, 0.15, {0.15}};
    EXPECT_NEAR(rhs_integral(bands, odd), 0.0, 1e-10);
  }
  EXPECT_THROW(rhs_integral(BandSet({0.8}), TestFunction{[](double) { return 1.0; }, 0.0, {}}), std::invalid_argument);
}

TEST(SlopeFit, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = slope_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-13);
  EXPECT_NEAR(f.residual, 0.0, 1e-13);
}

TEST(SlopeFit, ConstantData) {
  const std::vector<double> x{1, 2, 3, 4, 5}, y(5, 3.0);
  EXPECT_EQ(slope_fit(x, y).slope, 0.0);
}

TEST(SlopeFit, NoisyLineWithinOlsBound) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(0.5 * i);
    y.push_back(0.3 * x.back() - 2.0 + noise(rng));
  }
  double mx = 0, sxx = 0;
  for (double v : x) mx += v / x.size();
  for (double v : x) sxx += (v - mx) * (v - mx);
  const double sd = 0.01 / std::sqrt(sxx);
  EXPECT_NEAR(slope_fit(x, y).slope, 0.3, 3 * sd);
}

TEST(SlopeFit, Rejections) {
  EXPECT_THROW(slope_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW(slope_fit(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(slope_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(GeometricSequence, EndpointsAndRatio) {
  const auto v = geometric_sequence(1e-1, 3e-3, 8);
  EXPECT_EQ(v.front(), 1e-1);
  EXPECT_EQ(v.back(), 3e-3);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_NEAR(v[i] / v[i - 1], std::pow(0.03, 1.0 / 7), 1e-12);
}
