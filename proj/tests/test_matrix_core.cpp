#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "specdiff/linalg.hpp"

using namespace specdiff;

namespace {

RectMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> nd;
  RectMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

SelfAdjointMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  return SelfAdjointMatrix::symmetrized(random_matrix(rng, n, n));
}

SelfAdjointMatrix diag(std::vector<double> d) { return SelfAdjointMatrix::diagonal(d); }

double orthogonality_error(const RectMatrix& q) {
  const RectMatrix qtq = multiply(q, q, true, false);
  double e = 0.0;
  for (std::size_t i = 0; i < qtq.rows(); ++i)
    for (std::size_t j = 0; j < qtq.cols(); ++j) e = std::max(e, std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)));
  return e;
}

}  // namespace

TEST(Eig, IdentityHasUnitEigenvalues) {
  const auto e = diag({1, 1, 1}).eig();
  for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_LT(orthogonality_error(e.vectors), 1e-14);
}

TEST(Eig, DiagonalSortedAscending) {
  const auto e = diag({3, 1, 2}).eig();
  EXPECT_EQ(e.values, (std::vector<double>{1, 2, 3}));
}

TEST(Eig, RandomSymmetricReconstructs) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {50u, 257u}) {
    const auto a = random_symmetric(rng, n);
    EXPECT_LT(reconstruction_residual(a), 1e-10);
    EXPECT_LT(orthogonality_error(a.eig().vectors), 1e-10);
    EXPECT_TRUE(std::is_sorted(a.eig().values.begin(), a.eig().values.end()));
  }
}

TEST(Eig, ValuesOnlyAgreesWithFull) {
  std::mt19937_64 rng(2);
  const auto a = random_symmetric(rng, 120);
  const SelfAdjointMatrix fresh(a.entries());
  const auto only = fresh.eigenvalues();
  EXPECT_FALSE(fresh.has_eig_cache());
  const auto& full = a.eig().values;
  for (std::size_t i = 0; i < only.size(); ++i) EXPECT_NEAR(only[i], full[i], 1e-12 * 20);
}

TEST(Eig, CacheIsSharedBetweenCopiesAndThreads) {
  std::mt19937_64 rng(3);
  const auto a = random_symmetric(rng, 80);
  const SelfAdjointMatrix b = a;
  std::vector<const Eigendecomposition*> seen(4);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) pool.emplace_back([&, t] { seen[t] = &(t % 2 ? a : b).eig(); });
  for (auto& th : pool) th.join();
  for (auto* p : seen) EXPECT_EQ(p, seen[0]);
  EXPECT_TRUE(b.has_eig_cache());
}

TEST(SelfAdjoint, RejectsAsymmetricAndNonFinite) {
  RectMatrix m(2, 2);
  m(0, 1) = 1.0;
  EXPECT_THROW(SelfAdjointMatrix{m}, std::invalid_argument);
  m(1, 0) = 1.0 + 1e-14;
  EXPECT_NO_THROW(SelfAdjointMatrix{m});
  m(0, 0) = std::nan("");
  EXPECT_THROW(SelfAdjointMatrix{m}, std::invalid_argument);
  EXPECT_THROW(SelfAdjointMatrix(RectMatrix(2, 3)), std::invalid_argument);
}

TEST(MatrixFunction, IdentityMap) {
  const auto r = matrix_function(diag({1, 2}), [](double x) { return x; });
  EXPECT_NEAR(r(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(r(1, 1), 2.0, 1e-15);
  EXPECT_NEAR(r(0, 1), 0.0, 1e-15);
}

TEST(MatrixFunction, IdentityMapRandomWithin1e12) {
  std::mt19937_64 rng(4);
  const auto a = random_symmetric(rng, 60);
  const auto r = matrix_function(a, [](double x) { return x; });
  EXPECT_LT((r.entries() - a.entries()).max_abs(), 1e-12 * std::max(1.0, a.entries().max_abs()) * 10);
}

TEST(MatrixFunction, Square) {
  const auto r = matrix_function(diag({-1, 2}), [](double x) { return x * x; });
  EXPECT_NEAR(r(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(r(1, 1), 4.0, 1e-14);
}

TEST(MatrixFunction, SignStep) {
  const auto r = matrix_function(diag({-3, 5}), [](double x) { return (x < 0 ? 1.0 : 0.0) - 0.5; });
  EXPECT_DOUBLE_EQ(r(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r(1, 1), -0.5);
}

TEST(MatrixFunction, NonFiniteNamesEigenvalue) {
  try {
    matrix_function(diag({0.0, 1.0}), [](double x) { return 1.0 / x; });
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("eigenvalue 0"), std::string::npos);
  }
}

TEST(SingularValues, ZeroMatrix) {
  for (double s : singular_values(RectMatrix(3, 4))) EXPECT_EQ(s, 0.0);
}

TEST(SingularValues, DiagonalDescending) {
  EXPECT_EQ(singular_values(RectMatrix::diagonal(std::vector<double>{2, -3})), (std::vector<double>{3, 2}));
}

TEST(SingularValues, MatchEigenvaluesOfGram) {
  std::mt19937_64 rng(5);
  const RectMatrix x = random_matrix(rng, 30, 50);
  const auto s = singular_values(x);
  const SelfAdjointMatrix gram = SelfAdjointMatrix::symmetrized(multiply(x, x, false, true));
  auto ev = gram.eigenvalues();
  std::sort(ev.begin(), ev.end(), std::greater<>());
  ASSERT_EQ(s.size(), 30u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s[i], std::sqrt(std::max(0.0, ev[i])), 1e-10);
}

TEST(SingularValues, RejectsNonFinite) {
  RectMatrix x(2, 2);
  x(1, 1) = INFINITY;
  EXPECT_THROW(singular_values(x), std::invalid_argument);
}

TEST(Schatten, DiagonalExamples) {
  const RectMatrix d = RectMatrix::diagonal(std::vector<double>{3, 4});
  EXPECT_NEAR(schatten_norm(d, 2), 5.0, 1e-14);
  EXPECT_NEAR(schatten_norm(d, kSchattenInfinity), 4.0, 1e-14);
  EXPECT_NEAR(schatten_norm(d, 1), 7.0, 1e-14);
  EXPECT_THROW(schatten_norm(d, 0.5), std::invalid_argument);
}

TEST(Schatten, SelfAdjointOverloadAgrees) {
  std::mt19937_64 rng(6);
  const auto a = random_symmetric(rng, 25);
  for (double p : {1.0, 2.0, 3.5, kSchattenInfinity})
    EXPECT_NEAR(schatten_norm(a, p), schatten_norm(a.entries(), p), 1e-10 * schatten_norm(a, p));
}

TEST(Schatten, NoOverflowForLargeP) {
  const RectMatrix d = RectMatrix::diagonal(std::vector<double>{1e200, 1e200});
  EXPECT_NEAR(schatten_norm(d, 4) / 1e200, std::pow(2.0, 0.25), 1e-12);
}

TEST(Property, HolderInequality) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = dim(rng), k = dim(rng), m = dim(rng);
    const RectMatrix x = random_matrix(rng, n, k), y = random_matrix(rng, k, m);
    for (auto [p, q, r] : {std::tuple{2.0, 2.0, 1.0}, std::tuple{4.0, 4.0, 2.0}})
      EXPECT_LE(schatten_norm(multiply(x, y), r), schatten_norm(x, p) * schatten_norm(y, q) * (1 + 1e-12));
  }
}

TEST(Property, TraceInequality) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = dim(rng);
    const auto x = random_symmetric(rng, n), y = random_symmetric(rng, n);
    for (int m : {2, 3, 4}) {
      const double lhs = std::abs(trace_power(x, m) - trace_power(y, m));
      const double d = schatten_norm(SelfAdjointMatrix::symmetrized(x.entries() - y.entries()), m);
      const double rhs = m * d * std::pow(std::max(schatten_norm(x, m), schatten_norm(y, m)), m - 1);
      EXPECT_LE(lhs, rhs + 1e-10);
    }
  }
}

TEST(Property, SchattenDominance) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  for (int trial = 0; trial < 60; ++trial) {
    const RectMatrix x = random_matrix(rng, dim(rng), dim(rng));
    const double op = operator_norm(x);
    for (double q : {2.0, 4.0})
      for (double m : {q, q + 1, q + 2.5, 8.0}) {
        if (m < q) continue;
        const double lhs = std::pow(schatten_norm(x, m), m);
        const double rhs = std::pow(op, m - q) * std::pow(schatten_norm(x, q), q);
        EXPECT_LE(lhs, rhs * (1 + 1e-12) + 1e-12);
      }
  }
}

TEST(Sho, OneByOne) {
  const auto ev = sho_assemble(RectMatrix(1, 1, 2.0)).eigenvalues();
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0], -2.0, 1e-15);
  EXPECT_NEAR(ev[1], 2.0, 1e-15);
}

TEST(Sho, ZeroBlock) {
  const auto b = sho_assemble(RectMatrix(3, 2));
  for (double v : b.eigenvalues()) EXPECT_EQ(v, 0.0);
}

TEST(Sho, SpectrumIsPlusMinusSingularValues) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> dim(1, 15);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = trial == 0 ? 10 : dim(rng), c = trial == 0 ? 15 : dim(rng);
    const RectMatrix x = random_matrix(rng, r, c);
    std::vector<double> expected;
    for (double s : singular_values(x)) {
      expected.push_back(s);
      expected.push_back(-s);
    }
    expected.resize(r + c, 0.0);
    std::sort(expected.begin(), expected.end());
    const auto ev = sho_assemble(x).eigenvalues();
    for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], expected[i], 1e-10);
  }
}

TEST(TracePower, SmallDiagonal) {
  EXPECT_DOUBLE_EQ(trace_power(diag({1, -1}), 2), 2.0);
  EXPECT_DOUBLE_EQ(trace_power(diag({1, -1}), 3), 0.0);
  EXPECT_THROW(trace_power(diag({1}), 0), std::invalid_argument);
}

TEST(TracePower, MatchesRepeatedProduct) {
  std::mt19937_64 rng(11);
  const auto a = random_symmetric(rng, 40);
  const RectMatrix a2 = multiply(a.entries(), a.entries());
  const double direct = trace(multiply(a2, a2));
  EXPECT_NEAR(trace_power(a, 4), direct, 1e-8 * std::abs(direct));
}

TEST(Multiply, TransposeFlags) {
  std::mt19937_64 rng(12);
  const RectMatrix a = random_matrix(rng, 7, 5), b = random_matrix(rng, 7, 3);
  const RectMatrix c = multiply(a, b, true, false);
  const RectMatrix ref = multiply(a.transpose(), b);
  EXPECT_LT((c - ref).max_abs(), 1e-13);
  EXPECT_THROW(multiply(a, b), std::invalid_argument);
}
