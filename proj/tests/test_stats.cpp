#include <gtest/gtest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <vector>

#include "devalign/error.hpp"
#include "devalign/growth.hpp"
#include "devalign/rng.hpp"
#include "devalign/stats.hpp"

using namespace devalign;

TEST(IncompleteBeta, MatchesBoost) {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(0.05, 60.0);
    const double b = rng.uniform(0.05, 60.0);
    const double x = rng.uniform();
    EXPECT_NEAR(stats::incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12) << a << " " << b << " " << x;
  }
  EXPECT_EQ(stats::incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(stats::incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(StudentT, MatchesBoostTail) {
  for (double df : {1.0, 3.0, 10.0, 34.0, 200.0}) {
    for (double t : {0.0, 0.5, 1.7, 3.2, 8.0}) {
      const double oracle = boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
      EXPECT_NEAR(stats::student_t_two_sided(t, df), oracle, 1e-12);
      EXPECT_NEAR(stats::student_t_two_sided(-t, df), oracle, 1e-12);
    }
  }
}

TEST(Pearson, Fixture) {
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const std::vector<double> ys{2, 1, 4, 3, 5};
  const auto c = growth::pearson(xs, ys);
  EXPECT_NEAR(c.r, 0.8, 1e-12);
  EXPECT_NEAR(c.p, 0.10408803866182786, 1e-8);
  EXPECT_EQ(c.n, 5u);
}

TEST(Pearson, PerfectCases) {
  std::vector<double> xs;
  std::vector<double> neg;
  for (int i = 1; i <= 10; ++i) {
    xs.push_back(i * 0.7);
    neg.push_back(-i * 0.7);
  }
  const auto pos = growth::pearson(xs, xs);
  EXPECT_DOUBLE_EQ(pos.r, 1.0);
  EXPECT_EQ(pos.p, 0.0);
  EXPECT_DOUBLE_EQ(growth::pearson(xs, neg).r, -1.0);
}

TEST(Pearson, AffineInvariance) {
  Rng rng(4);
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < 30; ++i) {
    xs.push_back(rng.normal());
    ys.push_back(xs.back() + rng.normal());
  }
  const double r = stats::pearson_r(xs, ys);
  std::vector<double> xs2;
  std::vector<double> ys2;
  for (int i = 0; i < 30; ++i) {
    xs2.push_back(3.0 * xs[i] - 7.0);
    ys2.push_back(-0.5 * ys[i] + 100.0);
  }
  EXPECT_NEAR(stats::pearson_r(xs2, ys2), -r, 1e-12);
}

TEST(Pearson, Errors) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{1, 2};
  const std::vector<double> k{4, 4, 4};
  try {
    stats::pearson_r(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  try {
    stats::pearson_r(a, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateVariance);
  }
  EXPECT_THROW(growth::pearson(b, b), Error);
}

TEST(RSquared, Basic) {
  const std::vector<double> y{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(stats::r_squared(y, y), 1.0);
  const std::vector<double> m{2.5, 2.5, 2.5, 2.5};
  EXPECT_NEAR(stats::r_squared(y, m), 0.0, 1e-15);
}
