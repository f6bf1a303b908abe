#pragma once

#include <cmath>
#include <optional>

#include "pipenet/core.hpp"

namespace pipenet {

/// Haaland's explicit approximation of the turbulent Darcy friction factor,
///   1/sqrt(lambda) = -1.8 log10[(eps/(3.7 d))^1.11 + 6.9/Re].
inline double haaland_lambda(double roughness, double diameter, double reynolds) {
  if (!(diameter > 0.0) || !(reynolds > 0.0) || roughness < 0.0)
    throw DomainError("invalid friction regime: need d > 0, Re > 0, eps >= 0");
  const double arg = std::pow(roughness / (3.7 * diameter), 1.11) + 6.9 / reynolds;
  const double inv_sqrt = -1.8 * std::log10(arg);
  // arg >= 1 makes the right-hand side nonpositive: no physical solution.
  if (!(inv_sqrt > 0.0) || !std::isfinite(inv_sqrt)) throw DomainError("invalid friction regime");
  return 1.0 / (inv_sqrt * inv_sqrt);
}

/// Returns `params` with the friction factor filled in. An explicit factor wins;
/// otherwise Haaland is evaluated at the given Reynolds number.
inline PipeParams resolve_lambda(PipeParams params, std::optional<double> reynolds) {
  if (params.friction) return params;
  if (!reynolds)
    throw ConfigError("pipe needs either an explicit friction factor or a Reynolds number");
  params.friction = haaland_lambda(params.roughness, params.diameter, *reynolds);
  return params;
}

}  // namespace pipenet
