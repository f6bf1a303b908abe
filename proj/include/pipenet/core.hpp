#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pipenet {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside the mathematical domain of a formula (p <= 0, T <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete model/network configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Iterative or linear-algebra failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kGravity = 9.80665;  // m/s^2

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

/// Gas constants in SI units. c_v is only required by the nonisothermal model.
struct GasProperties {
  double R_s = 0.0;                 ///< specific gas constant [J/(kg K)]
  double z_0 = 0.0;                 ///< compressibility factor [1]
  std::optional<double> c_v;        ///< specific heat at constant volume [J/(kg K)]
  double T_0 = 0.0;                 ///< nominal temperature [K]
  double T_amb = 0.0;               ///< ambient temperature [K]

  /// z_0 R_s, the factor that appears in nearly every pipe equation.
  double zr() const { return z_0 * R_s; }

  double specific_heat() const {
    if (!c_v) throw ConfigError("gas: c_v is required by the nonisothermal model");
    return *c_v;
  }

  void validate() const {
    if (!(R_s > 0.0) || !(z_0 > 0.0) || !(T_0 > 0.0) || !(T_amb > 0.0))
      throw ConfigError("gas: R_s, z_0, T_0 and T_amb must be strictly positive");
    if (c_v && !(*c_v > 0.0)) throw ConfigError("gas: c_v must be strictly positive");
  }

  bool operator==(const GasProperties&) const = default;
};

/// Geometry and wall properties of a single pipe segment.
struct PipeParams {
  double length = 0.0;                ///< L [m]
  double diameter = 0.0;              ///< inside diameter d [m]
  double outer_diameter = 0.0;        ///< outside diameter [m]; 0 means "same as d"
  double roughness = 0.0;             ///< wall roughness eps [m]
  double elevation_change = 0.0;      ///< h, rise from left to right flange [m]
  std::optional<double> friction;     ///< Darcy friction factor lambda [1]
  double k_rad = 0.0;                 ///< lumped radial conductivity [W/(m^2 K)]

  /// Cross-sectional area A_c = pi d^2 / 4; derived, never stored separately.
  double area() const { return std::numbers::pi * diameter * diameter / 4.0; }

  double outer() const { return outer_diameter > 0.0 ? outer_diameter : diameter; }

  double lambda() const {
    if (!friction) throw ConfigError("pipe: friction factor not resolved");
    return *friction;
  }

  void validate() const {
    if (!(length > 0.0)) throw ConfigError("pipe: length must be > 0");
    if (!(diameter > 0.0)) throw ConfigError("pipe: diameter must be > 0");
    if (outer_diameter != 0.0 && outer_diameter < diameter)
      throw ConfigError("pipe: outside diameter must be >= inside diameter");
    if (roughness < 0.0) throw ConfigError("pipe: roughness must be >= 0");
    if (k_rad < 0.0) throw ConfigError("pipe: k_rad must be >= 0");
    if (friction && !(*friction > 0.0)) throw ConfigError("pipe: friction factor must be > 0");
  }

  bool operator==(const PipeParams&) const = default;
};

/// Nominal boundary values around which a pipe is linearized.
struct OperatingPoint {
  double p_l = 0.0;  ///< left pressure [Pa]
  double p_r = 0.0;  ///< right pressure [Pa]
  double q = 0.0;    ///< mass flow, equal at both flanges in steady state [kg/s]
  double T_l = 0.0;  ///< left temperature [K]
  double T_r = 0.0;  ///< right temperature [K]

  void validate() const {
    if (!(p_l > 0.0) || !(p_r > 0.0))
      throw DomainError("operating point: pressures must be strictly positive");
    if (!(T_l > 0.0) || !(T_r > 0.0))
      throw DomainError("operating point: temperatures must be strictly positive");
  }

  bool operator==(const OperatingPoint&) const = default;
};

// ---------------------------------------------------------------------------
// Signal labels
// ---------------------------------------------------------------------------

enum class Side { left, right };
enum class Quantity { pressure, flow, temperature };

/// Names one boundary signal of one element, rendered as "<element>.<l|r>.<p|q|T>".
struct SignalLabel {
  std::string element;
  Side side = Side::left;
  Quantity quantity = Quantity::pressure;

  std::string str() const {
    std::string s = element;
    s += side == Side::left ? ".l." : ".r.";
    switch (quantity) {
      case Quantity::pressure: s += 'p'; break;
      case Quantity::flow: s += 'q'; break;
      case Quantity::temperature: s += 'T'; break;
    }
    return s;
  }

  static SignalLabel parse(std::string_view text) {
    const auto bad = [&] { return ConfigError("malformed signal label '" + std::string(text) + "'"); };
    if (text.size() < 5) throw bad();
    const char q = text.back();
    const char s = text[text.size() - 3];
    if (text[text.size() - 2] != '.' || text[text.size() - 4] != '.') throw bad();
    SignalLabel label;
    label.element = std::string(text.substr(0, text.size() - 4));
    if (label.element.empty() || label.element.find('.') != std::string::npos) throw bad();
    if (s == 'l') label.side = Side::left;
    else if (s == 'r') label.side = Side::right;
    else throw bad();
    if (q == 'p') label.quantity = Quantity::pressure;
    else if (q == 'q') label.quantity = Quantity::flow;
    else if (q == 'T') label.quantity = Quantity::temperature;
    else throw bad();
    return label;
  }

  bool operator==(const SignalLabel&) const = default;
};

inline SignalLabel label(std::string element, Side side, Quantity quantity) {
  return SignalLabel{std::move(element), side, quantity};
}

inline std::vector<std::string> render(const std::vector<SignalLabel>& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.str());
  return out;
}

// ---------------------------------------------------------------------------
// State-space model
// ---------------------------------------------------------------------------

/// Continuous-time LTI model  x' = A x + B u,  y = C x + D u  with labelled signals.
struct StateSpaceModel {
  Eigen::MatrixXd A, B, C, D;
  std::vector<SignalLabel> state_labels;
  std::vector<SignalLabel> input_labels;
  std::vector<SignalLabel> output_labels;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
  Eigen::Index outputs() const { return C.rows(); }

  /// Throws ConfigError unless dimensions and labels are consistent.
  void validate() const {
    const auto n = A.rows(), m = B.cols(), p = C.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != p || D.cols() != m)
      throw ConfigError("state-space model: inconsistent matrix dimensions");
    if (std::ssize(state_labels) != n || std::ssize(input_labels) != m ||
        std::ssize(output_labels) != p)
      throw ConfigError("state-space model: label count does not match dimensions");
    check_unique(state_labels, "state");
    check_unique(input_labels, "input");
    check_unique(output_labels, "output");
  }

  static void check_unique(const std::vector<SignalLabel>& labels, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& l : labels)
      if (!seen.insert(l.str()).second)
        throw ConfigError(std::string("duplicate ") + what + " label " + l.str());
  }
};

/// A flange of an element. A left flange takes a pressure in and gives a flow out;
/// a right flange takes a flow in and gives a pressure out.
struct Port {
  std::string name;  ///< "l", "r", "l1", "r2", ...
  Side flange = Side::left;
  SignalLabel input;
  SignalLabel output;
};

inline Port left_port(std::string name, const std::string& element) {
  return {std::move(name), Side::left, label(element, Side::left, Quantity::pressure),
          label(element, Side::left, Quantity::flow)};
}

inline Port right_port(std::string name, const std::string& element) {
  return {std::move(name), Side::right, label(element, Side::right, Quantity::flow),
          label(element, Side::right, Quantity::pressure)};
}

/// Index of `target` in `labels`, or -1.
inline Eigen::Index find_label(const std::vector<SignalLabel>& labels, const SignalLabel& target) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == target) return static_cast<Eigen::Index>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// Gas law helpers
// ---------------------------------------------------------------------------

/// Density from the gas equation p = rho R_s T z_0.
inline double density(double p, double T, const GasProperties& gas) {
  if (!(p > 0.0) || !(T > 0.0)) throw DomainError("density: pressure and temperature must be > 0");
  return p / (gas.R_s * T * gas.z_0);
}

/// Isothermal speed of sound sqrt(z_0 R_s T_0).
inline double speed_of_sound(const GasProperties& gas) { return std::sqrt(gas.zr() * gas.T_0); }

enum class RegimeCheck {
  velocity,                 ///< |v| < 0.01 c
  elevation,                ///< |h| g < 0.01 c^2
  diameter,                 ///< d >= lambda / 2
  length_velocity,          ///< L |v| < 0.01 c^2
  length_velocity_squared,  ///< L v^2 < 0.01 c^2
};

struct RegimeWarning {
  RegimeCheck check;
  double value;   ///< left-hand side of the violated inequality
  double bound;   ///< right-hand side
  std::string message;
};

/// Margin used to turn "much smaller than" into a number.
inline constexpr double kRegimeMargin = 0.01;

/// Reports every violated small-velocity / small-elevation / geometry condition
/// under which the steady-state and isothermal approximations are derived.
/// An empty result means the pipe is inside the modelling regime.
inline std::vector<RegimeWarning> validate_regime(const PipeParams& params, const OperatingPoint& op,
                                                  const GasProperties& gas) {
  std::vector<RegimeWarning> warnings;
  const double c = speed_of_sound(gas);
  const double c2 = c * c;
  const double v = op.q / (density(op.p_l, op.T_l, gas) * params.area());
  const double av = std::abs(v);

  auto check = [&](RegimeCheck which, double lhs, double rhs, bool ok, const char* text) {
    if (!ok) warnings.push_back({which, lhs, rhs, text});
  };
  check(RegimeCheck::velocity, av, kRegimeMargin * c, av < kRegimeMargin * c,
        "gas velocity is not small compared with the speed of sound");
  const double hg = std::abs(params.elevation_change) * kGravity;
  check(RegimeCheck::elevation, hg, kRegimeMargin * c2, hg < kRegimeMargin * c2,
        "elevation change is not small compared with c^2/g");
  if (params.friction) {
    const double half = *params.friction / 2.0;
    check(RegimeCheck::diameter, params.diameter, half, params.diameter >= half,
          "diameter is below lambda/2");
  }
  const double lv = params.length * av;
  check(RegimeCheck::length_velocity, lv, kRegimeMargin * c2, lv < kRegimeMargin * c2,
        "L|v| is not small compared with c^2");
  const double lv2 = params.length * v * v;
  check(RegimeCheck::length_velocity_squared, lv2, kRegimeMargin * c2, lv2 < kRegimeMargin * c2,
        "L v^2 is not small compared with c^2");
  return warnings;
}

}  // namespace pipenet
