#include <gtest/gtest.h>

#include "support/testing.hpp"

using namespace pipenet;
using pipenet::testing::loop_pipe;
using pipenet::testing::methane;

TEST(ExactNominal, NoFlowNoRiseKeepsPressure) {
  EXPECT_EQ(exact_nominal_pr(25e5, 0.0, 300.0, 300.0, loop_pipe(), methane()), 25e5);
  EXPECT_EQ(approx_nominal_pr(25e5, 0.0, 300.0, 300.0, loop_pipe(), methane()), 25e5);
}

TEST(ExactNominal, HydrostaticColumn) {
  auto p = loop_pipe();
  p.elevation_change = 40.0;
  const auto gas = methane();
  const double expected = 25e5 * std::exp(-kGravity * 40.0 / (gas.zr() * 300.0));
  EXPECT_NEAR(exact_nominal_pr(25e5, 0.0, 300.0, 300.0, p, gas), expected, 1e-12 * expected);
}

TEST(ExactNominal, SatisfiesItsImplicitRelation) {
  pipenet::testing::Random rnd(21);
  for (int i = 0; i < 50; ++i) {
    const auto gas = rnd.gas();
    const auto p = rnd.pipe();
    const double p_l = rnd.uniform(1e6, 6e6);
    const double T_l = rnd.uniform(280.0, 320.0), T_r = rnd.uniform(280.0, 320.0);
    const double q = (rnd.chance(0.5) ? 1.0 : -1.0) * rnd.flow(p, p_l, T_l, gas);
    const double p_r = exact_nominal_pr(p_l, q, T_l, T_r, p, gas);
    const double Ac = p.area();
    const double rhs = std::pow(p_l, T_l / T_r) *
                       std::exp(-p.lambda() * p.length * gas.zr() * T_r * q * std::abs(q) / (2.0 * p.diameter * Ac * Ac * p_r * p_r) -
                                kGravity * p.elevation_change / (gas.zr() * T_r));
    EXPECT_NEAR(p_r, rhs, 1e-11 * p_r);
  }
}

TEST(ExactNominal, LoopPressureDropsAndMatchesApproximation) {
  const auto gas = methane();
  const double exact = exact_nominal_pr(25e5, 21.0, 300.0, 300.0, loop_pipe(), gas);
  const double approx = approx_nominal_pr(25e5, 21.0, 300.0, 300.0, loop_pipe(), gas);
  EXPECT_LT(exact, 25e5);
  EXPECT_LT(std::abs(approx - exact) / exact, 1e-4);
  // Darcy-Weisbach head loss at the inlet density, to first order.
  const auto p = loop_pipe();
  const double v = 21.0 / (density(25e5, 300.0, gas) * p.area());
  const double dw = p.lambda() * p.length / (2.0 * p.diameter) * density(25e5, 300.0, gas) * v * v;
  EXPECT_NEAR(25e5 - exact, dw, 1e-4 * dw);
}

TEST(ExactNominal, CoincidesWithTheDiscretizedSteadyState) {
  // Setting the flow derivative of the isothermal ODE to zero gives p_r explicitly.
  // The two differ at second order in the relative drop, so compare where it is small.
  const auto gas = methane();
  pipenet::testing::Random rnd(23);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto p = rnd.pipe();
    p.elevation_change = 0.0;
    const double p_l = rnd.uniform(1e6, 6e6), q = rnd.flow(p, p_l, gas.T_0, gas);
    const double rtz = gas.zr() * gas.T_0, Ac = p.area(), L = p.length;
    const double ode = p_l - L / Ac *
                                 (p.lambda() * rtz / (2.0 * p.diameter * Ac) * q * q / p_l +
                                  Ac * kGravity / rtz * (p.elevation_change / L) * p_l);
    const double exact = exact_nominal_pr(p_l, q, gas.T_0, gas.T_0, p, gas);
    if (std::abs(exact / p_l - 1.0) > 3e-5) continue;
    ++checked;
    EXPECT_NEAR(exact, ode, 1e-8 * exact);
  }
  EXPECT_GT(checked, 5);
  const auto loop = loop_pipe();
  const double rtz = gas.zr() * gas.T_0, Ac = loop.area();
  const double ode = 25e5 - loop.length / Ac * loop.lambda() * rtz / (2.0 * loop.diameter * Ac) * 21.0 * 21.0 / 25e5;
  EXPECT_NEAR(exact_nominal_pr(25e5, 21.0, gas.T_0, gas.T_0, loop, gas), ode, 1e-8 * ode);
}

TEST(ExactNominal, ApproximationGapIsSecondOrder) {
  const auto gas = methane();
  pipenet::testing::Random rnd(29);
  for (int i = 0; i < 30; ++i) {
    const auto p = rnd.pipe();
    const double p_l = rnd.uniform(1e6, 6e6), q = rnd.flow(p, p_l, 300.0, gas);
    const double exact = exact_nominal_pr(p_l, q, 300.0, 300.0, p, gas);
    const double x = std::abs(std::log(exact / p_l));
    if (x >= 1e-2) continue;
    const double approx = approx_nominal_pr(p_l, q, 300.0, 300.0, p, gas);
    EXPECT_LT(std::abs(approx - exact) / exact, 1e-3);
    EXPECT_LT(std::abs(approx - exact) / exact, 2.0 * x * x + 1e-14);
  }
}

TEST(ExactNominal, MoreFrictionMoreDrop) {
  auto p = loop_pipe();
  double prev = 0.0;
  for (double lambda = 0.005; lambda < 0.1; lambda *= 2.0) {
    p.friction = lambda;
    const double drop = 25e5 - exact_nominal_pr(25e5, 21.0, 300.0, 300.0, p, methane());
    EXPECT_GT(drop, prev);
    prev = drop;
  }
}

TEST(ExactNominal, ReversedFlowReflectsTheDrop) {
  // Mirror images up to the density at the outlet, which sits on the other side of p_l.
  const double fwd = exact_nominal_pr(25e5, 21.0, 300.0, 300.0, loop_pipe(), methane());
  const double back = exact_nominal_pr(25e5, -21.0, 300.0, 300.0, loop_pipe(), methane());
  EXPECT_GT(back, 25e5);
  EXPECT_NEAR(25e5 - fwd, back - 25e5, 1e-4 * (25e5 - fwd));
}

TEST(ExactNominal, ChokedFlowHasNoSolution) {
  EXPECT_THROW(exact_nominal_pr(25e5, 2e4, 300.0, 300.0, loop_pipe(), methane()), NumericalError);
}

TEST(ExactNominal, RejectsNonPhysicalInputs) {
  EXPECT_THROW(exact_nominal_pr(0.0, 1.0, 300.0, 300.0, loop_pipe(), methane()), DomainError);
  EXPECT_THROW(exact_nominal_pr(1e5, 1.0, 0.0, 300.0, loop_pipe(), methane()), DomainError);
}

TEST(IsothermalNominal, FillsTheOperatingPoint) {
  const auto op = isothermal_nominal(25e5, 21.0, 300.0, loop_pipe(), methane());
  EXPECT_EQ(op.p_l, 25e5);
  EXPECT_EQ(op.q, 21.0);
  EXPECT_EQ(op.T_l, 300.0);
  EXPECT_EQ(op.T_r, 300.0);
  EXPECT_LT(op.p_r, op.p_l);
  EXPECT_NO_THROW(op.validate());
  const auto rest = isothermal_nominal(25e5, 0.0, 300.0, loop_pipe(), methane());
  EXPECT_EQ(rest.p_r, 25e5);
}
