#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "pipenet/analysis.hpp"
#include "pipenet/core.hpp"
#include "pipenet/pipe_dynamics.hpp"

namespace pipenet {

/// Channel-major samples on a common, strictly increasing time grid.
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> channels;

  std::size_t samples() const { return times.size(); }

  const std::vector<double>& channel(const std::string& name) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == name) return channels[i];
    throw ConfigError("no channel named " + name);
  }

  void validate() const {
    if (labels.size() != channels.size()) throw ConfigError("time series: label/channel count mismatch");
    for (const auto& c : channels)
      if (c.size() != times.size()) throw ConfigError("time series: channel length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ConfigError("time series: times must be strictly increasing");
  }
};

/// Two-sample series holding `values` constant on [0, t_end].
inline TimeSeries constant_inputs(std::vector<std::string> labels, const Eigen::VectorXd& values, double t_end) {
  TimeSeries u;
  u.times = {0.0, t_end};
  u.labels = std::move(labels);
  for (Eigen::Index i = 0; i < values.size(); ++i) u.channels.push_back({values(i), values(i)});
  return u;
}

namespace detail {

/// Resolves model inputs to input-series channels; `aliases[i]` may name input i.
inline std::vector<std::size_t> match_channels(const std::vector<std::string>& wanted,
                                               const std::vector<std::string>& aliases,
                                               const TimeSeries& inputs) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    auto it = std::ranges::find(inputs.labels, wanted[i]);
    if (it == inputs.labels.end() && i < aliases.size() && !aliases[i].empty())
      it = std::ranges::find(inputs.labels, aliases[i]);
    if (it == inputs.labels.end()) throw ConfigError("missing input channel " + wanted[i]);
    idx.push_back(static_cast<std::size_t>(it - inputs.labels.begin()));
  }
  return idx;
}

/// Output grid t0, t0 + dt, ... up to the last input time.
inline std::vector<double> step_grid(const TimeSeries& inputs, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");
  inputs.validate();
  if (inputs.times.empty()) throw ConfigError("input series is empty");
  const double t0 = inputs.times.front();
  const double span = inputs.times.back() - t0;
  const auto steps = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = t0 + static_cast<double>(k) * dt;
  return grid;
}

/// Zero-order hold: the latest input sample at or before t.
class HeldInput {
 public:
  HeldInput(const TimeSeries& series, std::vector<std::size_t> channels)
      : series_(series), channels_(std::move(channels)) {}

  Eigen::VectorXd at(double t) {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    while (cursor_ + 1 < series_.times.size() && series_.times[cursor_ + 1] <= t + tol) ++cursor_;
    Eigen::VectorXd u(static_cast<Eigen::Index>(channels_.size()));
    for (std::size_t i = 0; i < channels_.size(); ++i) u(static_cast<Eigen::Index>(i)) = series_.channels[channels_[i]][cursor_];
    return u;
  }

 private:
  const TimeSeries& series_;
  std::vector<std::size_t> channels_;
  std::size_t cursor_ = 0;
};

inline TimeSeries empty_series(const std::vector<double>& grid, std::vector<std::string> labels) {
  TimeSeries out;
  out.times = grid;
  out.channels.assign(labels.size(), std::vector<double>(grid.size()));
  out.labels = std::move(labels);
  return out;
}

inline void store(TimeSeries& series, std::size_t k, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) series.channels[static_cast<std::size_t>(i)][k] = v(i);
}

}  // namespace detail

struct SimulationResult {
  TimeSeries states;
  TimeSeries outputs;
};

/// Exact discretization under zero-order hold: expm([[A, B], [0, 0]] dt).
struct DiscreteModel {
  Eigen::MatrixXd Ad, Bd;
};

inline DiscreteModel discretize_zoh(const StateSpaceModel& model, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");
  const auto n = model.states(), m = model.inputs();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = model.A * dt;
  aug.topRightCorner(n, m) = model.B * dt;
  const Eigen::MatrixXd e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Linear simulation; `aliases` optionally gives alternative channel names per model input.
inline SimulationResult simulate_lti(const StateSpaceModel& model, const TimeSeries& inputs,
                                     const Eigen::VectorXd& x0, double dt,
                                     const std::vector<std::string>& aliases = {}) {
  model.validate();
  if (x0.size() != model.states()) throw ConfigError("initial state has wrong dimension");
  const auto grid = detail::step_grid(inputs, dt);
  detail::HeldInput u(inputs, detail::match_channels(render(model.input_labels), aliases, inputs));
  const DiscreteModel dm = discretize_zoh(model, dt);

  SimulationResult out{detail::empty_series(grid, render(model.state_labels)),
                       detail::empty_series(grid, render(model.output_labels))};
  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd uk = u.at(grid[k]);
    detail::store(out.states, k, x);
    detail::store(out.outputs, k, model.C * x + model.D * uk);
    x = dm.Ad * x + dm.Bd * uk;
  }
  return out;
}

/// Nonlinear ODE in absolute variables with the linearization used to bound dt.
struct NonlinearModel {
  std::vector<std::string> state_labels;
  std::vector<std::string> input_labels;
  std::vector<bool> must_stay_positive;  ///< per state: pressures and temperatures
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> rhs;
  Eigen::MatrixXd linear_A;
};

/// Largest step allowed for `model`: 0.1 / max|Im(eig)|, or +inf without oscillatory modes.
inline double max_stable_step(const NonlinearModel& model) {
  StateSpaceModel lin;
  lin.A = model.linear_A;
  double fastest = 0.0;
  for (const Complex& e : eigenvalues(lin)) fastest = std::max(fastest, std::abs(e.imag()));
  return fastest > 0.0 ? 0.1 / fastest : std::numeric_limits<double>::infinity();
}

inline TimeSeries simulate_nonlinear(const NonlinearModel& model, const TimeSeries& inputs,
                                     const Eigen::VectorXd& x0, double dt) {
  const auto n = static_cast<Eigen::Index>(model.state_labels.size());
  if (x0.size() != n) throw ConfigError("initial state has wrong dimension");
  const double cap = max_stable_step(model);
  if (dt > cap * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt << " exceeds 0.1/max|Im(eig)| = " << cap;
    throw DomainError(msg.str());
  }
  const auto grid = detail::step_grid(inputs, dt);
  detail::HeldInput u(inputs, detail::match_channels(model.input_labels, {}, inputs));
  TimeSeries out = detail::empty_series(grid, model.state_labels);

  const auto left_domain = [&](double t) {
    std::ostringstream msg;
    msg << "simulation left physical domain at t=" << t;
    return DomainError(msg.str());
  };
  const auto check = [&](const Eigen::VectorXd& x, double t) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isfinite(x(i)) || (model.must_stay_positive[static_cast<std::size_t>(i)] && !(x(i) > 0.0)))
        throw left_domain(t);
  };

  Eigen::VectorXd x = x0;
  check(x, grid.front());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    detail::store(out, k, x);
    if (k + 1 == grid.size()) break;
    const Eigen::VectorXd uk = u.at(grid[k]);
    try {
      const Eigen::VectorXd k1 = model.rhs(x, uk);
      const Eigen::VectorXd k2 = model.rhs(x + 0.5 * dt * k1, uk);
      const Eigen::VectorXd k3 = model.rhs(x + 0.5 * dt * k2, uk);
      const Eigen::VectorXd k4 = model.rhs(x + dt * k3, uk);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const DomainError&) {
      throw left_domain(grid[k]);
    }
    check(x, grid[k + 1]);
  }
  return out;
}

/// Single isothermal pipe: states [p_r, q_l], inputs [p_l, q_r].
inline NonlinearModel nonlinear_pipe_2d(const std::string& id, const PipeParams& params,
                                        const GasProperties& gas, const OperatingPoint& op) {
  const StateSpaceModel lin = linearize_2d(params, op, gas, id);
  NonlinearModel m;
  m.state_labels = render(lin.state_labels);
  m.input_labels = render(lin.input_labels);
  m.must_stay_positive = {true, false};
  m.linear_A = lin.A;
  m.rhs = [params, gas](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const Derivative2D d = rhs_2d({x(0), x(1)}, {u(0), u(1)}, params, gas);
    Eigen::VectorXd dx(2);
    dx << d.p_r, d.q_l;
    return dx;
  };
  return m;
}

/// Single nonisothermal pipe: states [p_r, q_l, T_r], inputs [p_l, q_r, T_l].
inline NonlinearModel nonlinear_pipe_3d(const std::string& id, const PipeParams& params,
                                        const GasProperties& gas, const OperatingPoint& op) {
  const StateSpaceModel lin = linearize_3d(params, op, gas, id);
  NonlinearModel m;
  m.state_labels = render(lin.state_labels);
  m.input_labels = render(lin.input_labels);
  m.must_stay_positive = {true, false, true};
  m.linear_A = lin.A;
  m.rhs = [params, gas](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const Derivative3D d = rhs_3d({x(0), x(1), x(2)}, {u(0), u(1), u(2)}, params, gas);
    Eigen::VectorXd dx(3);
    dx << d.p_r, d.q_l, d.T_r;
    return dx;
  };
  return m;
}

/// Isothermal pipes in series with the same state ordering as make_series:
/// states [p_0r .. p_{N-1}r, q_0l .. q_{N-1}l], inputs [p_0l, q_{N-1}r].
inline NonlinearModel nonlinear_cascade_2d(const std::vector<std::string>& ids,
                                           const std::vector<PipeParams>& params, const GasProperties& gas,
                                           const std::vector<OperatingPoint>& ops) {
  const std::size_t N = ids.size();
  if (N == 0 || params.size() != N || ops.size() != N) throw ConfigError("cascade needs matching ids, params and nominal points");
  const auto n = static_cast<Eigen::Index>(N);
  NonlinearModel m;
  for (const auto& id : ids) m.state_labels.push_back(label(id, Side::right, Quantity::pressure).str());
  for (const auto& id : ids) m.state_labels.push_back(label(id, Side::left, Quantity::flow).str());
  m.input_labels = {label(ids.front(), Side::left, Quantity::pressure).str(),
                    label(ids.back(), Side::right, Quantity::flow).str()};
  m.must_stay_positive.assign(N, true);
  m.must_stay_positive.resize(2 * N, false);

  // Linearization: couple the per-pipe models the same way the ODE couples them.
  m.linear_A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const IsoCoefficients c = iso_coefficients(params[static_cast<std::size_t>(i)], ops[static_cast<std::size_t>(i)], gas);
    m.linear_A(i, n + i) = -c.alpha;
    if (i + 1 < n) m.linear_A(i, n + i + 1) = c.alpha;
    m.linear_A(n + i, i) = c.beta_pr;
    if (i > 0) m.linear_A(n + i, i - 1) = c.beta_pl;
    m.linear_A(n + i, n + i) = c.gamma;
  }

  m.rhs = [params, gas, n](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p_l = i == 0 ? u(0) : x(i - 1);
      const double q_r = i + 1 == n ? u(1) : x(n + i + 1);
      const Derivative2D d = rhs_2d({x(i), x(n + i)}, {p_l, q_r}, params[static_cast<std::size_t>(i)], gas);
      dx(i) = d.p_r;
      dx(n + i) = d.q_l;
    }
    return dx;
  };
  return m;
}

}  // namespace pipenet
