#pragma once

#include <cmath>
#include <functional>

#include "pipenet/core.hpp"

namespace pipenet {

// Steady-state right pressure of a pipe from the integrated momentum balance
// (Bernoulli with Darcy-Weisbach head loss H_L = lambda L / (2 d g) v|v|):
//
//   p_r = p_l^(T_l/T_r) exp(-lambda L v_r|v_r| / (2 d R_s z0 T_r) - g h / (R_s z0 T_r)),
//   v_r = q R_s z0 T_r / (A_c p_r).
//
// p_r appears on both sides, so the relation is solved as a fixed point. The friction
// exponent is negative for positive flow: pressure drops in the direction of flow.

struct SteadyStateOptions {
  double tolerance = 1e-12;  ///< relative residual
  int max_iterations = 200;
};

namespace detail {

struct NominalInputs {
  double p_l, q, T_l, T_r;
};

inline void check_nominal_inputs(const NominalInputs& in) {
  if (!(in.p_l > 0.0)) throw DomainError("steady state: p_l must be > 0");
  if (!(in.T_l > 0.0) || !(in.T_r > 0.0)) throw DomainError("steady state: temperatures must be > 0");
}

/// Friction exponent -lambda L z0 R_s T_r q|q| / (2 d A_c^2 p_r^2) at a trial p_r.
inline double friction_exponent(double p_r, const NominalInputs& in, const PipeParams& params,
                                const GasProperties& gas) {
  const double Ac = params.area();
  return -params.lambda() * params.length * gas.zr() * in.T_r * in.q * std::abs(in.q) /
         (2.0 * params.diameter * Ac * Ac * p_r * p_r);
}

inline double elevation_exponent(const NominalInputs& in, const PipeParams& params,
                                 const GasProperties& gas) {
  return -kGravity * params.elevation_change / (gas.zr() * in.T_r);
}

/// Largest root of p = map(p), which is the physical branch: for forward flow a
/// second, low-pressure root exists and there is none once the flow chokes.
/// Brackets upward from p0, scans down in small geometric steps, then bisects.
inline double solve_fixed_point(const std::function<double(double)>& map, double p0,
                                const SteadyStateOptions& opt) {
  const auto residual = [&](double p) { return p - map(p); };
  if (residual(p0) == 0.0) return p0;
  double hi = p0;
  for (int grow = 0; !(residual(hi) > 0.0); ++grow) {
    if (grow > 200 || !std::isfinite(hi)) throw NumericalError("steady-state solve diverged");
    hi *= 2.0;
  }
  constexpr double kStep = 0.99;
  const double floor = 1e-6 * hi;
  double lo = hi * kStep;
  for (;;) {
    const double r = residual(lo);
    if (r <= 0.0 || !std::isfinite(r)) break;
    hi = lo;
    lo *= kStep;
    if (lo < floor) throw NumericalError("steady-state solve has no solution (flow too large)");
  }
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= opt.tolerance * mid) return mid;
    const double r = residual(mid);
    if (r > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw NumericalError("steady-state solve diverged");
}

inline double zero_flow_pressure(const NominalInputs& in, const PipeParams& params,
                                 const GasProperties& gas) {
  return std::pow(in.p_l, in.T_l / in.T_r) * std::exp(elevation_exponent(in, params, gas));
}

}  // namespace detail

/// Right pressure from the exponential (exact) steady-state relation.
inline double exact_nominal_pr(double p_l, double q, double T_l, double T_r, const PipeParams& params,
                               const GasProperties& gas, const SteadyStateOptions& opt = {}) {
  const detail::NominalInputs in{p_l, q, T_l, T_r};
  detail::check_nominal_inputs(in);
  const double base = std::pow(p_l, T_l / T_r);
  const double elev = detail::elevation_exponent(in, params, gas);
  const auto map = [&](double p_r) {
    return base * std::exp(detail::friction_exponent(p_r, in, params, gas) + elev);
  };
  return detail::solve_fixed_point(map, detail::zero_flow_pressure(in, params, gas), opt);
}

/// Right pressure from the first-order expansion of the exponential.
inline double approx_nominal_pr(double p_l, double q, double T_l, double T_r, const PipeParams& params,
                                const GasProperties& gas, const SteadyStateOptions& opt = {}) {
  const detail::NominalInputs in{p_l, q, T_l, T_r};
  detail::check_nominal_inputs(in);
  const double base = std::pow(p_l, T_l / T_r);
  const double elev = detail::elevation_exponent(in, params, gas);
  const auto map = [&](double p_r) {
    return base * (1.0 + detail::friction_exponent(p_r, in, params, gas) + elev);
  };
  return detail::solve_fixed_point(map, base * (1.0 + elev), opt);
}

/// Full isothermal operating point at T_0: q_r = q_l = q and p_r from the exact relation.
inline OperatingPoint isothermal_nominal(double p_l, double q, double T_0, const PipeParams& params,
                                         const GasProperties& gas, const SteadyStateOptions& opt = {}) {
  OperatingPoint op;
  op.p_l = p_l;
  op.q = q;
  op.T_l = T_0;
  op.T_r = T_0;
  op.p_r = exact_nominal_pr(p_l, q, T_0, T_0, params, gas, opt);
  return op;
}

}  // namespace pipenet
