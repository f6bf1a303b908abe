#include <gtest/gtest.h>

#include "support/testing.hpp"

using namespace pipenet;

TEST(Haaland, LoopPipe) {
  const double lambda = haaland_lambda(4.57e-5, 0.7, 1.168e8);
  EXPECT_NEAR(lambda, 0.0111, 5e-4);
  EXPECT_NEAR(lambda, 0.011107, 1e-6);
}

TEST(Haaland, ExplicitFormulaOracle) {
  // Re-evaluate 1/sqrt(lambda) from the returned value.
  pipenet::testing::Random rnd(3);
  for (int i = 0; i < 50; ++i) {
    const double eps = rnd.uniform(0.0, 1e-3), d = rnd.uniform(0.05, 2.0), re = std::pow(10.0, rnd.uniform(4.0, 9.0));
    const double lambda = haaland_lambda(eps, d, re);
    const double rhs = -1.8 * std::log10(std::pow(eps / (3.7 * d), 1.11) + 6.9 / re);
    EXPECT_NEAR(1.0 / std::sqrt(lambda), rhs, 1e-12 * rhs);
  }
}

TEST(Haaland, SmoothPipeLimitDecreasesTowardZero) {
  double prev = haaland_lambda(0.0, 0.7, 1e5);
  for (double re = 1e6; re <= 1e15; re *= 10.0) {
    const double lambda = haaland_lambda(0.0, 0.7, re);
    EXPECT_LT(lambda, prev);
    prev = lambda;
  }
  EXPECT_LT(prev, 2e-3);
}

TEST(Haaland, IncreasesWithRoughness) {
  double prev = 0.0;
  for (double eps = 0.0; eps <= 1e-3; eps += 5e-5) {
    const double lambda = haaland_lambda(eps, 0.7, 1.168e8);
    EXPECT_GT(lambda, prev);
    prev = lambda;
  }
}

TEST(Haaland, ScaleInvarianceWhenReynoldsTermVanishes) {
  const double a = haaland_lambda(4.57e-5, 0.7, 1e15);
  const double b = haaland_lambda(4.57e-4, 7.0, 1e15);
  EXPECT_NEAR(a, b, 1e-6 * a);
}

TEST(Haaland, InvalidRegime) {
  EXPECT_THROW(haaland_lambda(1e-4, 0.0, 1e6), DomainError);
  EXPECT_THROW(haaland_lambda(1e-4, 0.7, 0.0), DomainError);
  EXPECT_THROW(haaland_lambda(-1.0, 0.7, 1e6), DomainError);
  EXPECT_THROW(haaland_lambda(0.0, 0.7, 1.0), DomainError);  // 6.9/Re >= 1
}

TEST(ResolveLambda, ExplicitWins) {
  PipeParams p;
  p.length = 10.0;
  p.diameter = 0.7;
  p.roughness = 4.57e-5;
  p.friction = 0.02;
  EXPECT_EQ(resolve_lambda(p, 1.168e8).lambda(), 0.02);
}

TEST(ResolveLambda, FallsBackToHaaland) {
  PipeParams p;
  p.length = 10.0;
  p.diameter = 0.7;
  p.roughness = 4.57e-5;
  EXPECT_NEAR(resolve_lambda(p, 1.168e8).lambda(), 0.0111, 5e-4);
  EXPECT_THROW(resolve_lambda(p, std::nullopt), ConfigError);
}
