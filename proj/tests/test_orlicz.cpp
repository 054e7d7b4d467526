#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "osb/orlicz.hpp"

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng) < -0.6 ? 0.0 : 10 * u(rng);
  return x;
}

TEST(MjFunction, ValuesAndKink) {
  const osb::MjFunction f(4);
  EXPECT_EQ(f(0.0), 0.0);
  EXPECT_EQ(f(0.25), 0.0);
  EXPECT_DOUBLE_EQ(f(1.0), 0.75);
  EXPECT_DOUBLE_EQ(f.kink(), 0.25);
  EXPECT_TRUE(f.strictly_convex_at(0.25));
  EXPECT_FALSE(f.strictly_convex_at(0.5));
  EXPECT_FALSE(f.strictly_convex_at(0.1));
  EXPECT_THROW(osb::MjFunction(0), osb::DomainError);
}

TEST(Luxemburg, SmallExamples) {
  const std::vector<double> e1{1.0, 0.0, 0.0};
  EXPECT_NEAR(osb::luxemburg_norm(e1, osb::MjFunction(1)), 0.5, 1e-12);
  const std::vector<double> two{1.0, 1.0, 0.0};
  EXPECT_NEAR(osb::luxemburg_norm(two, osb::MjFunction(2)), 1.0, 1e-12);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(osb::luxemburg_norm(zero, osb::MjFunction(1)), 0.0);
}

TEST(Luxemburg, MatchesClosedFormOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    const auto x = random_vector(rng, n);
    for (std::size_t j = 1; j <= n; j += 1 + n / 5) {
      const double expected = osb::oracle::mj_norm(x, j);
      const double got = osb::luxemburg_norm(x, osb::MjFunction(j));
      ASSERT_NEAR(got, expected, 1e-10 * (1 + expected)) << "n=" << n << " j=" << j;
    }
  }
}

TEST(Luxemburg, NormProperties) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const std::size_t j = 1 + rng() % n;
    const osb::MjFunction f(j);
    const auto x = random_vector(rng, n);
    const auto y = random_vector(rng, n);
    const double nx = osb::luxemburg_norm(x, f);
    const double ny = osb::luxemburg_norm(y, f);
    const double c = u(rng);
    std::vector<double> cx(n), sum(n), perm = x;
    for (std::size_t i = 0; i < n; ++i) {
      cx[i] = c * x[i];
      sum[i] = x[i] + y[i];
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    const double tol = 1e-9 * (1 + nx + ny);
    ASSERT_NEAR(osb::luxemburg_norm(cx, f), std::fabs(c) * nx, tol * (1 + std::fabs(c)));
    ASSERT_LE(osb::luxemburg_norm(sum, f), nx + ny + tol);
    ASSERT_NEAR(osb::luxemburg_norm(perm, f), nx, tol);
    if (nx > 0.0) {
      ASSERT_LE(osb::orlicz_modular(x, f, nx), 1.0 + 1e-9);
      ASSERT_GT(osb::orlicz_modular(x, f, nx * (1 - 1e-6)), 1.0);
    }
  }
}

TEST(Sandwich, HalfTopSumBelowNormBelowTopSum) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 25;
    const auto x = random_vector(rng, n);
    for (std::size_t j = 1; j <= n; ++j)
      for (const auto& r : osb::sandwich_check(x, j)) ASSERT_NE(r.status, osb::Status::fail) << r.check_id;
  }
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(osb::sandwich_check(x, 3), osb::DomainError);
}

TEST(ExtremePoints, UnitNormAndExpectationTwoOverN) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t cols = 1; cols <= 4; ++cols)
      for (std::size_t ell = 1; ell <= n; ++ell) {
        const auto g = osb::full_mapping_family(n, cols);
        std::size_t count = 0;
        for (const osb::Matrix& b : osb::extreme_points_bmj(n, cols, ell)) {
          ++count;
          ASSERT_NEAR(osb::luxemburg_norm(b.entries(), osb::MjFunction(ell * cols)), 1.0, 1e-12);
          ASSERT_NEAR(osb::expectation_exact(b, g, ell).value, 2.0 / static_cast<double>(cols), 1e-12);
        }
        ASSERT_EQ(count, n * cols);
      }
  EXPECT_THROW(osb::extreme_point_bmj(2, 2, 3, 0), osb::DomainError);
}

TEST(UpperBound, PassesOnRandomMatrices) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    const std::size_t cols = 1 + rng() % 4;
    const osb::Matrix a = osb::oracle::random_matrix(rng, n, cols, trial % 3);
    for (std::size_t ell = 1; ell <= n; ++ell) {
      const auto r = osb::upper_bound_check(a, osb::full_mapping_family(n, cols), ell);
      ASSERT_EQ(r.status, osb::Status::pass);
      ASSERT_EQ(r.check_id, "orlicz/upper");
    }
  }
}

}  // namespace
