#include <gtest/gtest.h>

#include "support/testing.hpp"

using namespace pipenet;
using pipenet::testing::loop_member;
using pipenet::testing::methane;

namespace {

StateSpaceModel single_pipe() {
  const auto m = loop_member("P");
  return linearize_2d(m.params, m.op, methane(), "P");
}

StateSpaceModel diagonal(std::initializer_list<double> poles) {
  StateSpaceModel m;
  const auto n = static_cast<Eigen::Index>(poles.size());
  m.A = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index i = 0;
  for (const double p : poles) {
    m.A(i, i) = p;
    m.state_labels.push_back(label("X" + std::to_string(i), Side::right, Quantity::pressure));
    ++i;
  }
  m.B = Eigen::MatrixXd::Ones(n, 1);
  m.C = Eigen::MatrixXd::Ones(1, n);
  m.D = Eigen::MatrixXd::Zero(1, 1);
  m.input_labels = {label("U", Side::left, Quantity::pressure)};
  m.output_labels = {label("Y", Side::right, Quantity::pressure)};
  return m;
}

}  // namespace

TEST(Eigenvalues, SortedByRealThenImaginaryPart) {
  auto m = diagonal({-3.0, -1.0, -2.0});
  const auto e = eigenvalues(m);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_DOUBLE_EQ(e[0].real(), -1.0);
  EXPECT_DOUBLE_EQ(e[2].real(), -3.0);
  const auto pipe = eigenvalues(single_pipe());
  ASSERT_EQ(pipe.size(), 2u);
  EXPECT_GT(pipe[0].imag(), 0.0);
  EXPECT_EQ(pipe[0], std::conj(pipe[1]));
}

TEST(Eigenvalues, HurwitzAndMargin) {
  EXPECT_TRUE(is_hurwitz(diagonal({-1.0, -0.5})));
  EXPECT_FALSE(is_hurwitz(diagonal({-1.0, 0.0})));
  EXPECT_DOUBLE_EQ(max_real_part(diagonal({-4.0, 2.0})), 2.0);
  StateSpaceModel bad = diagonal({-1.0});
  bad.A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(eigenvalues(bad), NumericalError);
}

TEST(DcGain, ClosedFormForDiagonalSystem) {
  // C (-A)^-1 B = sum 1/|p|
  EXPECT_NEAR(dc_gain(diagonal({-1.0, -2.0, -4.0}))(0, 0), 1.75, 1e-14);
}

TEST(DcGain, StaticModelIsItsFeedthrough) {
  const auto g = make_gain("K", 3.0);
  EXPECT_EQ(dc_gain(g.model), g.model.D);
}

TEST(DcGain, PoleAtZeroIsRejected) {
  try {
    dc_gain(diagonal({-1.0, 0.0}));
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_STREQ(e.what(), "system has a pole at zero; DC gain undefined");
  }
}

TEST(DcGain, AgreesWithTheTransferMatrixAtZero) {
  const auto net = pipenet::testing::loop_network();
  const auto closed = close(net.stacked, net.connection);
  const Eigen::MatrixXd G = dc_gain(closed);
  const auto H = transfer_at(closed, Complex(0.0, 0.0));
  EXPECT_FALSE(H.flagged);
  EXPECT_LT((H.H.real() - G).norm(), 1e-9 * (1.0 + G.norm()));
  EXPECT_LT(H.H.imag().norm(), 1e-12);
  const auto low = freq_response(closed, {1e-7});
  EXPECT_LT((low.H[0] - G.cast<Complex>()).norm(), 1e-4 * (1.0 + G.norm()));
}

TEST(DcGain, StateGainSolvesTheEquilibrium) {
  const auto m = single_pipe();
  const Eigen::MatrixXd X = state_dc_gain(m);
  EXPECT_LT((m.A * X + m.B).norm(), 1e-9 * m.B.norm());
}

TEST(FrequencyResponse, GridHelpers) {
  const auto g = log_grid(1e-2, 1e2, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-2);
  EXPECT_NEAR(g[2], 1.0, 1e-14);
  EXPECT_NEAR(g.back(), 1e2, 1e-12);
  EXPECT_EQ(decade_grid(1e-3, 1e3).size(), 1201u);
  EXPECT_THROW(log_grid(0.0, 1.0, 10), DomainError);
}

TEST(FrequencyResponse, PipeResonatesNearSoundSpeedOverLength) {
  const auto m = single_pipe();
  const auto grid = log_grid(1.0, 1e3, 2000);
  const auto fr = freq_response(m, grid);
  // input q_r -> output p_r
  std::size_t peak = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (std::abs(fr.H[k](0, 1)) > std::abs(fr.H[peak](0, 1))) peak = k;
  const double c_over_L = speed_of_sound(methane()) / 10.0;
  EXPECT_NEAR(grid[peak], c_over_L, 0.05 * c_over_L);
}

TEST(FrequencyResponse, FlagsSamplesOnAPole) {
  const auto sample = transfer_at(diagonal({-1.0, 0.0}), Complex(0.0, 0.0));
  EXPECT_TRUE(sample.flagged);
}

TEST(Mason, LoopAgreesWithTheSignalFlowGraph) {
  const auto net = pipenet::testing::loop_network();
  const auto r = mason_check(net.stacked, net.connection, log_grid(1e-3, 1e3, 20));
  EXPECT_EQ(r.flagged_samples, 0);
  EXPECT_LT(r.max_deviation, 1e-8);
}

TEST(Mason, TwoPipesInAFeedbackLoop) {
  const auto gas = methane();
  const auto a = make_pipe(loop_member("A"), gas), b = make_pipe(loop_member("B"), gas);
  const auto k = make_gain("K", 2.0);
  const auto s = stack(std::vector<NamedModel>{{"A", &a.model}, {"K", &k.model}, {"B", &b.model}});
  // A -> K -> B -> back into A: a closed ring with no external input.
  const auto c = build_FG(s, {{a.ports[1], k.ports[0]}, {k.ports[1], b.ports[0]}, {b.ports[1], a.ports[0]}}, {});
  const auto r = mason_check(s, c, log_grid(1e-3, 1e3, 20));
  EXPECT_EQ(r.flagged_samples, 0);
  EXPECT_LT(r.max_deviation, 1e-8);
}

TEST(Mason, RandomWellPosedNetworks) {
  pipenet::testing::Random rnd(101);
  int checked = 0;
  for (int attempt = 0; attempt < 400 && checked < 50; ++attempt) {
    pipenet::testing::RandomNetwork net;
    if (!pipenet::testing::random_network(rnd, 6, net)) continue;
    const auto r = mason_check(net.stacked, net.connection, log_grid(1e-3, 1e3, 20));
    if (r.flagged_samples > 0) continue;  // ω on a lossless pole
    ++checked;
    EXPECT_LT(r.max_deviation, 1e-8) << "attempt " << attempt;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Sweep, DeterministicAndMatchesDirectEvaluation) {
  const auto spec = parse_netspec(pipenet::testing::read_network("loop.pipenet"));
  const std::vector<double> ks{2.0, 4.0, 8.0};
  const auto first = stability_margin_sweep(spec, "C", ks);
  EXPECT_EQ(first, stability_margin_sweep(spec, "C", ks));
  const auto net = elaborate(with_gain(spec, "C", 8.0));
  EXPECT_EQ(first[2], max_real_part(close(net.stacked, net.connection)));
  EXPECT_THROW(stability_margin_sweep(spec, "P4", ks), ConfigError);
}

TEST(Sweep, GenericBuilder) {
  const auto worst = stability_margin_sweep([](double k) { return diagonal({-k, -2.0 * k}); }, {1.0, 3.0});
  EXPECT_EQ(worst, (std::vector<double>{-1.0, -3.0}));
}

TEST(LoopDcGain, FlowsBalanceAtEveryNode) {
  const auto net = pipenet::testing::loop_network();
  const auto closed = close(net.stacked, net.connection);
  const Eigen::MatrixXd X = state_dc_gain(closed);
  const auto q = [&](int i) {
    const auto row = find_label(closed.state_labels, label("P" + std::to_string(i), Side::left, Quantity::flow));
    EXPECT_GE(row, 0);
    return Eigen::RowVectorXd(X.row(row));
  };
  constexpr double tol = 1e-9;
  EXPECT_LT((q(3) - q(1) - q(2)).norm(), tol);   // joint
  EXPECT_LT((q(5) - q(6) - q(7)).norm(), tol);   // first branch
  EXPECT_LT((q(8) - q(9) - q(10)).norm(), tol);  // second branch
  EXPECT_LT((q(3) - q(4)).norm(), tol);          // through the compressor
  EXPECT_LT((q(4) - q(5)).norm(), tol);          // through the valve
  EXPECT_LT((q(7) - q(8)).norm(), tol);
  EXPECT_LT((q(10) - q(2)).norm(), tol);         // return line
}

TEST(LoopDcGain, MatchesReferenceFlowTable) {
  const auto net = pipenet::testing::loop_network();
  const auto closed = close(net.stacked, net.connection);
  const Eigen::MatrixXd X = state_dc_gain(closed);
  // columns fill, dist, vent
  const std::vector<std::array<double, 3>> expected{
      {0.0, 1.0, 1.0},         {0.1839, -0.8, -1.0222}, {0.1839, 0.2, -0.0222}, {0.1839, 0.2, -0.0222},
      {0.1839, 0.2, -0.0222},  {0.0, 1.0, 0.0},         {0.1839, -0.8, -0.0222}, {0.1839, -0.8, -0.0222},
      {0.0, 0.0, 1.0},         {0.1839, -0.8, -1.0222}};
  for (int i = 1; i <= 10; ++i) {
    const auto row = find_label(closed.state_labels, label("P" + std::to_string(i), Side::left, Quantity::flow));
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(X(row, j), expected[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)], 5e-4)
          << "P" << i << " column " << j;
  }
}
