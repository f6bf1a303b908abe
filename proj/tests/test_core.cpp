#include <gtest/gtest.h>

#include "support/testing.hpp"

using namespace pipenet;
using pipenet::testing::methane;

TEST(Density, UnitDensityAtGasConstantPressure) {
  const auto gas = methane();
  EXPECT_NEAR(density(gas.R_s * gas.z_0 * 300.0, 300.0, gas), 1.0, 1e-14);
}

TEST(Density, LoopNominal) {
  EXPECT_NEAR(density(25e5, 300.0, methane()), 16.93, 5e-3);
}

TEST(Density, HomogeneousInPressureAndTemperature) {
  const auto gas = methane();
  pipenet::testing::Random rnd(7);
  for (int i = 0; i < 50; ++i) {
    const double p = rnd.uniform(1e5, 1e7), T = rnd.uniform(200.0, 400.0), s = rnd.uniform(0.1, 10.0);
    EXPECT_NEAR(density(s * p, T, gas), s * density(p, T, gas), 1e-12 * s * density(p, T, gas));
    EXPECT_NEAR(density(p, s * T, gas), density(p, T, gas) / s, 1e-12 * density(p, T, gas) / s);
  }
}

TEST(Density, RejectsNonPositiveArguments) {
  EXPECT_THROW(density(0.0, 300.0, methane()), DomainError);
  EXPECT_THROW(density(1e5, -1.0, methane()), DomainError);
}

TEST(SpeedOfSound, Methane) {
  const auto gas = methane();
  EXPECT_NEAR(speed_of_sound(gas), 384.3, 0.05);
  const double c = speed_of_sound(gas);
  EXPECT_NEAR(c * c, gas.z_0 * gas.R_s * gas.T_0, 1e-12 * c * c);
  auto heavier = gas;
  heavier.z_0 *= 4.0;
  EXPECT_NEAR(speed_of_sound(heavier), 2.0 * c, 1e-12 * c);
}

TEST(PipeParams, AreaFromDiameter) {
  PipeParams p;
  p.diameter = 0.7;
  EXPECT_NEAR(p.area(), std::numbers::pi * 0.49 / 4.0, 1e-12 * p.area());
  EXPECT_EQ(p.outer(), 0.7);
  p.outer_diameter = 0.75;
  EXPECT_EQ(p.outer(), 0.75);
}

TEST(PipeParams, Validation) {
  PipeParams p;
  p.length = 10.0;
  p.diameter = 0.5;
  EXPECT_NO_THROW(p.validate());
  p.outer_diameter = 0.4;
  EXPECT_THROW(p.validate(), ConfigError);
  p.outer_diameter = 0.0;
  p.friction = -0.01;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(PipeParams{}.lambda(), ConfigError);
}

TEST(GasProperties, SpecificHeatIsOptional) {
  auto gas = methane();
  gas.c_v.reset();
  EXPECT_NO_THROW(gas.validate());
  EXPECT_THROW(gas.specific_heat(), ConfigError);
  gas.R_s = 0.0;
  EXPECT_THROW(gas.validate(), ConfigError);
}

TEST(SignalLabel, RenderAndParseRoundTrip) {
  for (const auto q : {Quantity::pressure, Quantity::flow, Quantity::temperature})
    for (const auto s : {Side::left, Side::right}) {
      const SignalLabel l = label("P10", s, q);
      EXPECT_EQ(SignalLabel::parse(l.str()), l);
    }
  EXPECT_EQ(label("P3", Side::right, Quantity::pressure).str(), "P3.r.p");
  EXPECT_EQ(label("J", Side::left, Quantity::temperature).str(), "J.l.T");
}

TEST(SignalLabel, RejectsMalformed) {
  for (const char* bad : {"", "P3", "P3.x.p", "P3.r.z", "P3.r", ".r.p", "A.B.r.p", "P3-r-p"})
    EXPECT_THROW(SignalLabel::parse(bad), ConfigError) << bad;
}

TEST(StateSpaceModel, ValidateCatchesShapeAndLabelErrors) {
  StateSpaceModel m;
  m.A = Eigen::MatrixXd::Zero(2, 2);
  m.B = Eigen::MatrixXd::Zero(2, 1);
  m.C = Eigen::MatrixXd::Zero(1, 2);
  m.D = Eigen::MatrixXd::Zero(1, 1);
  m.state_labels = {label("P", Side::right, Quantity::pressure), label("P", Side::left, Quantity::flow)};
  m.input_labels = {label("P", Side::left, Quantity::pressure)};
  m.output_labels = {label("P", Side::right, Quantity::pressure)};
  EXPECT_NO_THROW(m.validate());
  m.state_labels[1] = m.state_labels[0];
  EXPECT_THROW(m.validate(), ConfigError);
  m.state_labels.pop_back();
  EXPECT_THROW(m.validate(), ConfigError);
}

namespace {

OperatingPoint flowing(double q) {
  return {25e5, 25e5, q, 300.0, 300.0};
}

bool has(const std::vector<RegimeWarning>& ws, RegimeCheck c) {
  return std::ranges::any_of(ws, [&](const RegimeWarning& w) { return w.check == c; });
}

}  // namespace

TEST(Regime, LoopPipeIsInside) {
  const auto p = pipenet::testing::loop_pipe();
  EXPECT_TRUE(validate_regime(p, flowing(21.0), methane()).empty());
  const double v = 21.0 / (density(25e5, 300.0, methane()) * p.area());
  EXPECT_NEAR(v, 3.2, 0.05);
}

TEST(Regime, ZeroFlowSatisfiesVelocityConditions) {
  const auto ws = validate_regime(pipenet::testing::loop_pipe(), flowing(0.0), methane());
  EXPECT_FALSE(has(ws, RegimeCheck::velocity));
  EXPECT_FALSE(has(ws, RegimeCheck::length_velocity));
  EXPECT_FALSE(has(ws, RegimeCheck::length_velocity_squared));
}

TEST(Regime, DiameterBoundIsHalfTheFrictionFactor) {
  auto p = pipenet::testing::loop_pipe();
  p.friction = 0.0111;
  p.diameter = 0.00556;
  EXPECT_FALSE(has(validate_regime(p, flowing(0.0), methane()), RegimeCheck::diameter));
  p.diameter = 0.0055;
  EXPECT_TRUE(has(validate_regime(p, flowing(0.0), methane()), RegimeCheck::diameter));
  p.diameter = 0.004;
  EXPECT_TRUE(has(validate_regime(p, flowing(0.0), methane()), RegimeCheck::diameter));
}

TEST(Regime, FastFlowAndTallRiseAreReported) {
  auto p = pipenet::testing::loop_pipe();
  p.elevation_change = 500.0;
  p.length = 100.0;
  const auto ws = validate_regime(p, flowing(400.0), methane());
  EXPECT_TRUE(has(ws, RegimeCheck::velocity));
  EXPECT_TRUE(has(ws, RegimeCheck::elevation));
  EXPECT_TRUE(has(ws, RegimeCheck::length_velocity));
}

TEST(Regime, LongPipeTripsTheLengthChecks) {
  auto p = pipenet::testing::loop_pipe();
  p.length = 2e5;
  const auto ws = validate_regime(p, flowing(21.0), methane());
  EXPECT_FALSE(has(ws, RegimeCheck::velocity));
  EXPECT_TRUE(has(ws, RegimeCheck::length_velocity));
  EXPECT_TRUE(has(ws, RegimeCheck::length_velocity_squared));
}

TEST(Regime, SlowFlowSeparatesTheTwoLengthChecks) {
  // |v| < 1 m/s makes L v^2 smaller than L |v|.
  auto p = pipenet::testing::loop_pipe();
  p.length = 3000.0;
  const auto ws = validate_regime(p, flowing(4.0), methane());
  EXPECT_TRUE(has(ws, RegimeCheck::length_velocity));
  EXPECT_FALSE(has(ws, RegimeCheck::length_velocity_squared));
}
