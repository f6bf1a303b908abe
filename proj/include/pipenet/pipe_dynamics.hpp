#pragma once

#include <array>
#include <cmath>
#include <string>

#include "pipenet/core.hpp"

namespace pipenet {

// Boundary convention: inputs are (p_l, q_r[, T_l]), states are (p_r, q_l[, T_r]).

struct PipeState3D {
  double p_r = 0.0;
  double q_l = 0.0;
  double T_r = 0.0;
};

struct PipeInput3D {
  double p_l = 0.0;
  double q_r = 0.0;
  double T_l = 0.0;
};

struct PipeState2D {
  double p_r = 0.0;
  double q_l = 0.0;
};

struct PipeInput2D {
  double p_l = 0.0;
  double q_r = 0.0;
};

struct Derivative3D {
  double p_r = 0.0;
  double q_l = 0.0;
  double T_r = 0.0;
};

struct Derivative2D {
  double p_r = 0.0;
  double q_l = 0.0;
};

/// Coefficients of the linearized isothermal pipe
///   p_r' = alpha (q_r - q_l)
///   q_l' = beta_pr p_r + beta_pl p_l + gamma q_l
struct IsoCoefficients {
  double alpha = 0.0;
  double beta_pr = 0.0;
  double beta_pl = 0.0;
  double gamma = 0.0;
};

namespace detail {

inline void require_positive(double value, const char* what) {
  if (!(value > 0.0)) throw DomainError(std::string(what) + " must be strictly positive");
}

inline StateSpaceModel pipe_model_shell(const std::string& id, int order) {
  StateSpaceModel m;
  m.A = Eigen::MatrixXd::Zero(order, order);
  m.B = Eigen::MatrixXd::Zero(order, order);
  m.C = Eigen::MatrixXd::Identity(order, order);
  m.D = Eigen::MatrixXd::Zero(order, order);
  m.state_labels = {label(id, Side::right, Quantity::pressure), label(id, Side::left, Quantity::flow)};
  m.input_labels = {label(id, Side::left, Quantity::pressure), label(id, Side::right, Quantity::flow)};
  if (order == 3) {
    m.state_labels.push_back(label(id, Side::right, Quantity::temperature));
    m.input_labels.push_back(label(id, Side::left, Quantity::temperature));
  }
  m.output_labels = m.state_labels;
  return m;
}

}  // namespace detail

/// Isothermal spatially discretized momentum/continuity right-hand side.
inline Derivative2D rhs_2d(const PipeState2D& x, const PipeInput2D& u, const PipeParams& params,
                           const GasProperties& gas) {
  detail::require_positive(u.p_l, "p_l");
  const double L = params.length;
  const double Ac = params.area();
  const double rtz = gas.zr() * gas.T_0;
  const double lambda = params.lambda();
  Derivative2D dx;
  dx.p_r = -rtz / (Ac * L) * (u.q_r - x.q_l);
  dx.q_l = -Ac / L * (x.p_r - u.p_l) -
           lambda * rtz / (2.0 * params.diameter * Ac) * x.q_l * std::abs(x.q_l) / u.p_l -
           Ac * kGravity / rtz * (params.elevation_change / L) * u.p_l;
  return dx;
}

/// Nonisothermal three-state right-hand side: pressure, flow and temperature with
/// radial heat exchange k_rad pi d_out (T_amb - T_r). Gradients are differences over L,
/// the elevation gradient is h/L.
inline Derivative3D rhs_3d(const PipeState3D& x, const PipeInput3D& u, const PipeParams& params,
                           const GasProperties& gas) {
  detail::require_positive(x.p_r, "p_r");
  detail::require_positive(u.p_l, "p_l");
  detail::require_positive(x.T_r, "T_r");
  detail::require_positive(u.T_l, "T_l");
  const double L = params.length;
  const double d = params.diameter;
  const double Ac = params.area();
  const double K = gas.zr();
  const double cv = gas.specific_heat();
  const double lambda = params.lambda();

  const double heat = params.k_rad * std::numbers::pi * params.outer() * (gas.T_amb - x.T_r);
  const double friction_heat = lambda * K * K * x.T_r * x.T_r * u.q_r * u.q_r * std::abs(u.q_r) /
                               (2.0 * d * Ac * Ac * x.p_r * x.p_r);
  const double shared = (x.p_r - u.p_l) / L * K * x.T_r * u.q_r / x.p_r -
                        (x.T_r - u.T_l) / L * u.q_r * (cv + K) + friction_heat;
  const double dq = (u.q_r - x.q_l) / L;

  Derivative3D dx;
  dx.p_r = K / (Ac * cv) * (heat - dq * x.T_r * (cv + K) + shared);
  dx.q_l = -Ac * (x.p_r - u.p_l) / L -
           lambda * K * u.T_l / (2.0 * d * Ac) * x.q_l * std::abs(x.q_l) / u.p_l -
           Ac * kGravity / (K * u.T_l) * (params.elevation_change / L) * u.p_l;
  dx.T_r = K * x.T_r / (Ac * cv * x.p_r) * (heat - dq * x.T_r * K + shared);
  return dx;
}

/// Linearization coefficients of the isothermal model. Friction terms use p_l,ss.
inline IsoCoefficients iso_coefficients(const PipeParams& params, const OperatingPoint& op,
                                        const GasProperties& gas) {
  detail::require_positive(op.p_l, "p_l,ss");
  const double L = params.length;
  const double Ac = params.area();
  const double rtz = gas.zr() * gas.T_0;
  const double lambda = params.lambda();
  const double q = op.q;
  IsoCoefficients c;
  c.alpha = -rtz / (Ac * L);
  c.beta_pr = -Ac / L;
  c.beta_pl = Ac / L + lambda * rtz / (2.0 * params.diameter * Ac) * q * std::abs(q) / (op.p_l * op.p_l) -
              Ac * kGravity * params.elevation_change / (rtz * L);
  c.gamma = -lambda * rtz / (params.diameter * Ac) * std::abs(q) / op.p_l;
  return c;
}

/// Two-state isothermal model: states [p_r, q_l], inputs [p_l, q_r], outputs = states.
inline StateSpaceModel linearize_2d(const IsoCoefficients& c, const std::string& id = "P") {
  StateSpaceModel m = detail::pipe_model_shell(id, 2);
  m.A << 0.0, -c.alpha,
         c.beta_pr, c.gamma;
  m.B << 0.0, c.alpha,
         c.beta_pl, 0.0;
  return m;
}

inline StateSpaceModel linearize_2d(const PipeParams& params, const OperatingPoint& op,
                                    const GasProperties& gas, const std::string& id = "P") {
  return linearize_2d(iso_coefficients(params, op, gas), id);
}

/// Analytic Jacobians of rhs_3d at (x, u).
struct Jacobian3D {
  Eigen::Matrix3d A;  ///< d f / d [p_r, q_l, T_r]
  Eigen::Matrix3d B;  ///< d f / d [p_l, q_r, T_l]
};

inline Jacobian3D jacobian_3d(const PipeState3D& x, const PipeInput3D& u, const PipeParams& params,
                              const GasProperties& gas) {
  detail::require_positive(x.p_r, "p_r");
  detail::require_positive(u.p_l, "p_l");
  detail::require_positive(x.T_r, "T_r");
  detail::require_positive(u.T_l, "T_l");
  const double L = params.length;
  const double d = params.diameter;
  const double Ac = params.area();
  const double K = gas.zr();
  const double cv = gas.specific_heat();
  const double lambda = params.lambda();
  const double h = params.elevation_change;
  const double wall = params.k_rad * std::numbers::pi * params.outer();

  const double pr = x.p_r, ql = x.q_l, Tr = x.T_r;
  const double pl = u.p_l, qr = u.q_r, Tl = u.T_l;

  const double heat = wall * (gas.T_amb - Tr);
  const double fh_coef = lambda * K * K / (2.0 * d * Ac * Ac);
  const double fh = fh_coef * Tr * Tr * qr * qr * std::abs(qr) / (pr * pr);
  const double shared = (pr - pl) / L * K * Tr * qr / pr - (Tr - Tl) / L * qr * (cv + K) + fh;
  const double dq = (qr - ql) / L;
  const double bracket_T = heat - dq * Tr * K + shared;

  // Partials of the shared bracket terms.
  const double s_pr = K * Tr * qr * pl / (L * pr * pr) - 2.0 * fh / pr;
  const double s_pl = -K * Tr * qr / (L * pr);
  const double s_qr = (pr - pl) / L * K * Tr / pr - (Tr - Tl) / L * (cv + K) +
                      3.0 * fh_coef * Tr * Tr * qr * std::abs(qr) / (pr * pr);
  const double s_Tr = (pr - pl) / L * K * qr / pr - qr * (cv + K) / L + 2.0 * fh / Tr;
  const double s_Tl = qr * (cv + K) / L;

  const double cp_coef = K / (Ac * cv);
  const double ct_coef = K * Tr / (Ac * cv * pr);

  Jacobian3D J;
  // Pressure row.
  J.A(0, 0) = cp_coef * s_pr;
  J.A(0, 1) = cp_coef * Tr * (cv + K) / L;
  J.A(0, 2) = cp_coef * (-wall - dq * (cv + K) + s_Tr);
  J.B(0, 0) = cp_coef * s_pl;
  J.B(0, 1) = cp_coef * (-Tr * (cv + K) / L + s_qr);
  J.B(0, 2) = cp_coef * s_Tl;

  // Flow row.
  const double fr_coef = lambda * K / (2.0 * d * Ac);
  J.A(1, 0) = -Ac / L;
  J.A(1, 1) = -fr_coef * Tl * 2.0 * std::abs(ql) / pl;
  J.A(1, 2) = 0.0;
  J.B(1, 0) = Ac / L + fr_coef * Tl * ql * std::abs(ql) / (pl * pl) - Ac * kGravity * h / (K * Tl * L);
  J.B(1, 1) = 0.0;
  J.B(1, 2) = -fr_coef * ql * std::abs(ql) / pl + Ac * kGravity * h * pl / (K * Tl * Tl * L);

  // Temperature row: f_T = (K Tr / (Ac cv pr)) * bracket_T.
  J.A(2, 0) = -ct_coef / pr * bracket_T + ct_coef * s_pr;
  J.A(2, 1) = ct_coef * Tr * K / L;
  J.A(2, 2) = cp_coef / pr * bracket_T + ct_coef * (-wall - dq * K + s_Tr);
  J.B(2, 0) = ct_coef * s_pl;
  J.B(2, 1) = ct_coef * (-Tr * K / L + s_qr);
  J.B(2, 2) = ct_coef * s_Tl;
  return J;
}

/// Three-state nonisothermal model linearized at `op`: states [p_r, q_l, T_r],
/// inputs [p_l, q_r, T_l], C = I, D = 0.
inline StateSpaceModel linearize_3d(const PipeParams& params, const OperatingPoint& op,
                                    const GasProperties& gas, const std::string& id = "P") {
  op.validate();
  const Jacobian3D J = jacobian_3d({op.p_r, op.q, op.T_r}, {op.p_l, op.q, op.T_l}, params, gas);
  StateSpaceModel m = detail::pipe_model_shell(id, 3);
  m.A = J.A;
  m.B = J.B;
  return m;
}

}  // namespace pipenet
