#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "pipenet/core.hpp"
#include "pipenet/pipe_dynamics.hpp"

namespace pipenet {

enum class CompositeKind { pipe, joint, branch, series, gain };

inline const char* to_string(CompositeKind kind) {
  switch (kind) {
    case CompositeKind::pipe: return "pipe";
    case CompositeKind::joint: return "joint";
    case CompositeKind::branch: return "branch";
    case CompositeKind::series: return "series";
    case CompositeKind::gain: return "gain";
  }
  return "?";
}

/// One pipe taking part in a composite, with its resolved parameters and nominal point.
struct MemberPipe {
  std::string id;
  PipeParams params;
  OperatingPoint op;
};

/// How composites treat nominal points that violate the junction balances.
enum class NominalCheck {
  strict,   ///< throw ConfigError
  lenient,  ///< record a warning and build the model anyway
};

inline constexpr double kNominalTolerance = 1e-9;

/// Multi-pipe element whose algebraic junction constraints are already eliminated.
struct CompositeModel {
  StateSpaceModel model;
  CompositeKind kind = CompositeKind::pipe;
  std::vector<std::string> member_ids;
  double delta = 0.0;  ///< joint flow split alpha_1 / (alpha_1 + alpha_2)
  std::vector<Port> ports;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline void require_positive_flow(std::span<const MemberPipe* const> members) {
  for (const MemberPipe* m : members)
    if (!(m->op.q > 0.0))
      throw ConfigError("composite requires positive nominal flow (pipe " + m->id + ")");
}

inline void nominal_issue(CompositeModel& out, NominalCheck check, const std::string& message) {
  if (check == NominalCheck::strict) throw ConfigError(message);
  out.warnings.push_back(message);
}

inline void check_split(CompositeModel& out, NominalCheck check, const std::string& kind,
                        const MemberPipe& trunk, const MemberPipe& a, const MemberPipe& b) {
  if (!close_rel(trunk.op.q, a.op.q + b.op.q, kNominalTolerance))
    nominal_issue(out, check,
                  "inconsistent nominal flows in " + kind + ": q(" + trunk.id + ") != q(" + a.id +
                      ") + q(" + b.id + ")");
}

}  // namespace detail

/// Single 2D pipe as a network element; ports "l" and "r".
inline CompositeModel make_pipe(const MemberPipe& pipe, const GasProperties& gas) {
  CompositeModel out;
  out.kind = CompositeKind::pipe;
  out.member_ids = {pipe.id};
  out.model = linearize_2d(pipe.params, pipe.op, gas, pipe.id);
  out.ports = {left_port("l", pipe.id), right_port("r", pipe.id)};
  return out;
}

/// Two feeder pipes merging into one outlet pipe (index-1 constraint eliminated).
///
/// States  [p_0r, p_1r, q_0l, q_1l, q_2l]
/// Inputs  [p_1l, p_2l, q_0r]
/// Outputs [p_0r, q_1l, q_2l]
///
/// The shared junction pressure p_1r = p_2r = p_0l is carried by p_1r; its rate is the
/// feeder capacitances in parallel, alpha_1 (1 - delta) = alpha_1 alpha_2 / (alpha_1 + alpha_2).
inline CompositeModel make_joint(const MemberPipe& outlet, const MemberPipe& feeder1,
                                 const MemberPipe& feeder2, const GasProperties& gas,
                                 NominalCheck check = NominalCheck::strict) {
  const MemberPipe* members[] = {&outlet, &feeder1, &feeder2};
  detail::require_positive_flow(members);
  CompositeModel out;
  out.kind = CompositeKind::joint;
  out.member_ids = {outlet.id, feeder1.id, feeder2.id};
  detail::check_split(out, check, "joint", outlet, feeder1, feeder2);
  if (!detail::close_rel(feeder1.op.p_r, feeder2.op.p_r, kNominalTolerance))
    detail::nominal_issue(out, check,
                          "inconsistent nominal junction pressure in joint: p_r(" + feeder1.id +
                              ") != p_r(" + feeder2.id + ")");

  const IsoCoefficients c0 = iso_coefficients(outlet.params, outlet.op, gas);
  const IsoCoefficients c1 = iso_coefficients(feeder1.params, feeder1.op, gas);
  const IsoCoefficients c2 = iso_coefficients(feeder2.params, feeder2.op, gas);
  out.delta = c1.alpha / (c1.alpha + c2.alpha);
  const double a1 = c1.alpha * (1.0 - out.delta);

  StateSpaceModel& m = out.model;
  m.A.resize(5, 5);
  m.A << 0, 0, -c0.alpha, 0, 0,
         0, 0, a1, -a1, -a1,
         c0.beta_pr, c0.beta_pl, c0.gamma, 0, 0,
         0, c1.beta_pr, 0, c1.gamma, 0,
         0, c2.beta_pr, 0, 0, c2.gamma;
  m.B.resize(5, 3);
  m.B << 0, 0, c0.alpha,
         0, 0, 0,
         0, 0, 0,
         c1.beta_pl, 0, 0,
         0, c2.beta_pl, 0;
  m.C = Eigen::MatrixXd::Zero(3, 5);
  m.C(0, 0) = 1.0;
  m.C(1, 3) = 1.0;
  m.C(2, 4) = 1.0;
  m.D = Eigen::MatrixXd::Zero(3, 3);

  m.state_labels = {label(outlet.id, Side::right, Quantity::pressure),
                    label(feeder1.id, Side::right, Quantity::pressure),
                    label(outlet.id, Side::left, Quantity::flow),
                    label(feeder1.id, Side::left, Quantity::flow),
                    label(feeder2.id, Side::left, Quantity::flow)};
  m.input_labels = {label(feeder1.id, Side::left, Quantity::pressure),
                    label(feeder2.id, Side::left, Quantity::pressure),
                    label(outlet.id, Side::right, Quantity::flow)};
  m.output_labels = {label(outlet.id, Side::right, Quantity::pressure),
                     label(feeder1.id, Side::left, Quantity::flow),
                     label(feeder2.id, Side::left, Quantity::flow)};
  out.ports = {left_port("l1", feeder1.id), left_port("l2", feeder2.id), right_port("r", outlet.id)};
  return out;
}

/// One inlet pipe splitting into two outlet pipes. No state is eliminated.
///
/// States  [p_0r, p_1r, p_2r, q_0l, q_1l, q_2l]
/// Inputs  [p_0l, q_1r, q_2r]
/// Outputs [p_1r, p_2r, q_0l]
inline CompositeModel make_branch(const MemberPipe& inlet, const MemberPipe& outlet1,
                                  const MemberPipe& outlet2, const GasProperties& gas,
                                  NominalCheck check = NominalCheck::strict) {
  const MemberPipe* members[] = {&inlet, &outlet1, &outlet2};
  detail::require_positive_flow(members);
  CompositeModel out;
  out.kind = CompositeKind::branch;
  out.member_ids = {inlet.id, outlet1.id, outlet2.id};
  detail::check_split(out, check, "branch", inlet, outlet1, outlet2);

  const IsoCoefficients c0 = iso_coefficients(inlet.params, inlet.op, gas);
  const IsoCoefficients c1 = iso_coefficients(outlet1.params, outlet1.op, gas);
  const IsoCoefficients c2 = iso_coefficients(outlet2.params, outlet2.op, gas);

  StateSpaceModel& m = out.model;
  m.A.resize(6, 6);
  m.A << 0, 0, 0, -c0.alpha, c0.alpha, c0.alpha,
         0, 0, 0, 0, -c1.alpha, 0,
         0, 0, 0, 0, 0, -c2.alpha,
         c0.beta_pr, 0, 0, c0.gamma, 0, 0,
         c1.beta_pl, c1.beta_pr, 0, 0, c1.gamma, 0,
         c2.beta_pl, 0, c2.beta_pr, 0, 0, c2.gamma;
  m.B.resize(6, 3);
  m.B << 0, 0, 0,
         0, c1.alpha, 0,
         0, 0, c2.alpha,
         c0.beta_pl, 0, 0,
         0, 0, 0,
         0, 0, 0;
  m.C = Eigen::MatrixXd::Zero(3, 6);
  m.C(0, 1) = 1.0;
  m.C(1, 2) = 1.0;
  m.C(2, 3) = 1.0;
  m.D = Eigen::MatrixXd::Zero(3, 3);

  m.state_labels = {label(inlet.id, Side::right, Quantity::pressure),
                    label(outlet1.id, Side::right, Quantity::pressure),
                    label(outlet2.id, Side::right, Quantity::pressure),
                    label(inlet.id, Side::left, Quantity::flow),
                    label(outlet1.id, Side::left, Quantity::flow),
                    label(outlet2.id, Side::left, Quantity::flow)};
  m.input_labels = {label(inlet.id, Side::left, Quantity::pressure),
                    label(outlet1.id, Side::right, Quantity::flow),
                    label(outlet2.id, Side::right, Quantity::flow)};
  m.output_labels = {label(outlet1.id, Side::right, Quantity::pressure),
                     label(outlet2.id, Side::right, Quantity::pressure),
                     label(inlet.id, Side::left, Quantity::flow)};
  out.ports = {left_port("l", inlet.id), right_port("r1", outlet1.id), right_port("r2", outlet2.id)};
  return out;
}

/// N pipes in a run, p_{i,r} = p_{i+1,l} and q_{i,r} = q_{i+1,l}.
///
/// States  [p_0r .. p_{N-1}r, q_0l .. q_{N-1}l]
/// Inputs  [p_0l, q_{N-1}r]
/// Outputs [p_{N-1}r, q_0l]
inline CompositeModel make_series(std::span<const MemberPipe> pipes, const GasProperties& gas,
                                  NominalCheck check = NominalCheck::strict) {
  if (pipes.empty()) throw ConfigError("series needs at least one pipe");
  const auto N = static_cast<Eigen::Index>(pipes.size());
  CompositeModel out;
  out.kind = CompositeKind::series;
  for (const auto& p : pipes) {
    if (!(p.op.q > 0.0)) throw ConfigError("composite requires positive nominal flow (pipe " + p.id + ")");
    out.member_ids.push_back(p.id);
  }
  for (Eigen::Index i = 0; i + 1 < N; ++i) {
    const auto& a = pipes[static_cast<std::size_t>(i)];
    const auto& b = pipes[static_cast<std::size_t>(i + 1)];
    if (!detail::close_rel(a.op.q, b.op.q, kNominalTolerance))
      detail::nominal_issue(out, check, "inconsistent nominal flow along series: q(" + a.id + ") != q(" + b.id + ")");
    if (!detail::close_rel(a.op.p_r, b.op.p_l, kNominalTolerance))
      detail::nominal_issue(out, check,
                            "nominal pressures not chained in series: p_r(" + a.id + ") != p_l(" + b.id + ")");
  }

  std::vector<IsoCoefficients> c;
  c.reserve(pipes.size());
  for (const auto& p : pipes) c.push_back(iso_coefficients(p.params, p.op, gas));

  StateSpaceModel& m = out.model;
  m.A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  m.B = Eigen::MatrixXd::Zero(2 * N, 2);
  m.C = Eigen::MatrixXd::Zero(2, 2 * N);
  m.D = Eigen::MatrixXd::Zero(2, 2);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& ci = c[static_cast<std::size_t>(i)];
    m.A(i, N + i) = -ci.alpha;
    if (i + 1 < N) m.A(i, N + i + 1) = ci.alpha;
    m.A(N + i, i) = ci.beta_pr;
    if (i > 0) m.A(N + i, i - 1) = ci.beta_pl;
    m.A(N + i, N + i) = ci.gamma;
  }
  m.B(N - 1, 1) = c.back().alpha;
  m.B(N, 0) = c.front().beta_pl;
  m.C(0, N - 1) = 1.0;
  m.C(1, N) = 1.0;

  for (const auto& p : pipes) m.state_labels.push_back(label(p.id, Side::right, Quantity::pressure));
  for (const auto& p : pipes) m.state_labels.push_back(label(p.id, Side::left, Quantity::flow));
  m.input_labels = {label(pipes.front().id, Side::left, Quantity::pressure),
                    label(pipes.back().id, Side::right, Quantity::flow)};
  m.output_labels = {label(pipes.back().id, Side::right, Quantity::pressure),
                     label(pipes.front().id, Side::left, Quantity::flow)};
  out.ports = {left_port("l", pipes.front().id), right_port("r", pipes.back().id)};
  return out;
}

/// Static pressure-gain unit (compressor, valve): p_r = k p_l, q_l = q_r.
inline CompositeModel make_gain(const std::string& id, double k) {
  if (k == 0.0 || !std::isfinite(k)) throw ConfigError("gain " + id + ": k must be finite and nonzero");
  CompositeModel out;
  out.kind = CompositeKind::gain;
  out.member_ids = {id};
  StateSpaceModel& m = out.model;
  m.A = Eigen::MatrixXd::Zero(0, 0);
  m.B = Eigen::MatrixXd::Zero(0, 2);
  m.C = Eigen::MatrixXd::Zero(2, 0);
  m.D.resize(2, 2);
  m.D << k, 0.0,
         0.0, 1.0;
  m.input_labels = {label(id, Side::left, Quantity::pressure), label(id, Side::right, Quantity::flow)};
  m.output_labels = {label(id, Side::right, Quantity::pressure), label(id, Side::left, Quantity::flow)};
  out.ports = {left_port("l", id), right_port("r", id)};
  return out;
}

}  // namespace pipenet
