#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pipenet/core.hpp"
#include "pipenet/interconnect.hpp"

namespace pipenet {

using Complex = std::complex<double>;

namespace detail {

inline void require_finite(const StateSpaceModel& model) {
  if (!model.A.allFinite() || !model.B.allFinite() || !model.C.allFinite() || !model.D.allFinite())
    throw NumericalError("model has non-finite entries");
}

}  // namespace detail

/// Spectrum of A sorted by descending real part, then descending imaginary part.
inline std::vector<Complex> eigenvalues(const StateSpaceModel& model) {
  detail::require_finite(model);
  if (model.states() == 0) return {};
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(model.A, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  std::vector<Complex> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::ranges::sort(out, [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

/// Largest real part of the spectrum; -inf for a static model.
inline double max_real_part(const StateSpaceModel& model) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Complex& e : eigenvalues(model)) worst = std::max(worst, e.real());
  return worst;
}

inline bool is_hurwitz(const StateSpaceModel& model) { return max_real_part(model) < 0.0; }

namespace detail {

inline Eigen::PartialPivLU<Eigen::MatrixXd> factor_state_matrix(const StateSpaceModel& model) {
  detail::require_finite(model);
  if (!(condition_number(model.A) <= kIllPosedCondition))
    throw NumericalError("system has a pole at zero; DC gain undefined");
  return Eigen::PartialPivLU<Eigen::MatrixXd>(model.A);
}

}  // namespace detail

/// Steady-state output gain D - C A^-1 B.
inline Eigen::MatrixXd dc_gain(const StateSpaceModel& model) {
  if (model.states() == 0) return model.D;
  const auto lu = detail::factor_state_matrix(model);
  return model.D - model.C * lu.solve(model.B);
}

/// Steady-state state gain -A^-1 B, useful when a quantity of interest is a state
/// but not an output of the element that owns it.
inline Eigen::MatrixXd state_dc_gain(const StateSpaceModel& model) {
  if (model.states() == 0) return Eigen::MatrixXd::Zero(0, model.inputs());
  const auto lu = detail::factor_state_matrix(model);
  return -lu.solve(model.B);
}

struct FrequencyResponse {
  std::vector<double> omegas;
  std::vector<Eigen::MatrixXcd> H;
  std::vector<bool> flagged;  ///< resolvent too ill-conditioned to trust

  bool any_flagged() const { return std::ranges::find(flagged, true) != flagged.end(); }
};

struct TransferSample {
  Eigen::MatrixXcd H;
  bool flagged = false;
};

namespace detail {

/// rcond() alone misses exactly singular matrices, so the pivot spread is checked too.
inline bool ill_conditioned(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
  if (lu.matrixLU().size() == 0) return false;
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  return !(lu.rcond() * kIllPosedCondition >= 1.0) || !(pivots.minCoeff() * kIllPosedCondition >= pivots.maxCoeff());
}

}  // namespace detail

/// Evaluates C (sI - A)^-1 B + D at one complex frequency.
inline TransferSample transfer_at(const StateSpaceModel& model, Complex s) {
  TransferSample out;
  const auto n = model.states();
  out.H = model.D.cast<Complex>();
  if (n == 0) return out;
  const Eigen::MatrixXcd resolvent = s * Eigen::MatrixXcd::Identity(n, n) - model.A.cast<Complex>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(resolvent);
  out.flagged = detail::ill_conditioned(lu);
  out.H += model.C.cast<Complex>() * lu.solve(model.B.cast<Complex>());
  return out;
}

inline FrequencyResponse freq_response(const StateSpaceModel& model, const std::vector<double>& omegas) {
  detail::require_finite(model);
  FrequencyResponse out;
  out.omegas = omegas;
  for (const double w : omegas) {
    if (!(w >= 0.0)) throw DomainError("frequency must be >= 0");
    auto sample = transfer_at(model, Complex(0.0, w));
    out.H.push_back(std::move(sample.H));
    out.flagged.push_back(sample.flagged);
  }
  return out;
}

/// n points spaced evenly in log10 between wmin and wmax inclusive.
inline std::vector<double> log_grid(double wmin, double wmax, int n) {
  if (!(wmin > 0.0) || !(wmax >= wmin) || n < 1) throw DomainError("log grid needs 0 < wmin <= wmax, n >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log10(wmin), b = std::log10(wmax);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, n == 1 ? a : a + (b - a) * i / (n - 1));
  return out;
}

/// Default Bode grid: 200 points per decade between wmin and wmax.
inline std::vector<double> decade_grid(double wmin, double wmax, int per_decade = 200) {
  const double decades = std::log10(wmax / wmin);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  return log_grid(wmin, wmax, n);
}

struct MasonResult {
  double max_deviation = 0.0;
  int flagged_samples = 0;
};

/// Compares the closed-loop transfer matrix with the signal-flow-graph solution
/// (I - Q)^-1 P, Q = H_open F, P = H_open G, built from the open stacked system.
/// Deviation per frequency is ||H_closed - H_graph||_F / (1 + ||H_graph||_F).
inline MasonResult mason_check(const StackedSystem& stacked, const ConnectionMatrices& conn,
                               const std::vector<double>& omegas) {
  const StateSpaceModel closed = close(stacked, conn);
  const Eigen::MatrixXcd F = conn.F.cast<Complex>();
  const Eigen::MatrixXcd G = conn.G.cast<Complex>();
  const auto p = stacked.model.outputs();
  MasonResult out;
  for (const double w : omegas) {
    const Complex s(0.0, w);
    const TransferSample open = transfer_at(stacked.model, s);
    const TransferSample direct = transfer_at(closed, s);
    const Eigen::MatrixXcd Q = open.H * F;
    const Eigen::MatrixXcd P = open.H * G;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Eigen::MatrixXcd::Identity(p, p) - Q);
    if (open.flagged || direct.flagged || detail::ill_conditioned(lu)) {
      ++out.flagged_samples;
      continue;
    }
    const Eigen::MatrixXcd graph = lu.solve(P);
    const double dev = (direct.H - graph).norm() / (1.0 + graph.norm());
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

/// Max real eigenvalue of `build(k)` for each k.
inline std::vector<double> stability_margin_sweep(const std::function<StateSpaceModel(double)>& build,
                                                  const std::vector<double>& ks) {
  std::vector<double> out;
  out.reserve(ks.size());
  for (const double k : ks) out.push_back(max_real_part(build(k)));
  return out;
}

}  // namespace pipenet
