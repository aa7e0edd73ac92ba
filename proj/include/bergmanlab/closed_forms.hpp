#pragma once

// Closed forms attached to the radial extremal weight v_alpha(z) =
// (1-|z|^2)^{alpha+2}: its distribution function, tail mass, the measure
// growth function M_alpha, and the excess functional A(s,t). alpha = -1 is
// the boundary limit throughout (log forms, obtained as limits).

#include <cmath>

#include "bergmanlab/common.hpp"

namespace bergmanlab::forms {

inline void require_alpha(double alpha) {
    if (!(alpha >= -1.0)) throw ConfigError("alpha must be >= -1");
}

// mu({v_alpha > t}) = pi (t^{-1/(alpha+2)} - 1), strictly decreasing to 0 at t=1.
inline double rho0(double t, double alpha) {
    require_alpha(alpha);
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("rho0 requires t in (0,1]");
    return pi * (std::pow(t, -1.0 / (alpha + 2.0)) - 1.0);
}

// K_alpha(t) = integral (v_alpha - t)_+ dmu
//            = (pi/(alpha+1)) ((alpha+1) t + 1 - (alpha+2) t^{(alpha+1)/(alpha+2)}).
// Decreasing from pi/(alpha+1) at t=0 to 0 at t=1. alpha > -1 only.
inline double K_alpha(double t, double alpha) {
    if (!(alpha > -1.0)) throw ConfigError("K_alpha requires alpha > -1");
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("K_alpha requires t in [0,1]");
    const double q = (alpha + 1.0) / (alpha + 2.0);
    return pi / (alpha + 1.0) * ((alpha + 1.0) * t + 1.0 - (alpha + 2.0) * std::pow(t, q));
}

// Boundary-limit tail mass: integral (v_{-1} - t)_+ dmu = pi (t - 1 + log(1/t)).
inline double K_hardy(double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("K_hardy requires t in (0,1]");
    return pi * (t - 1.0 - std::log(t));
}

// Elementary lower bound K_alpha(t) >= (pi/(2(alpha+2))) (1-t)^2.
inline double K_alpha_lower(double t, double alpha) {
    return pi / (2.0 * (alpha + 2.0)) * (1.0 - t) * (1.0 - t);
}

// M_alpha(s) = C (1 + (alpha+2)/(alpha+1) ((1+s/pi)^{alpha+1} - 1)); the
// alpha -> -1 limit is C (1 + log(1+s/pi)). Increasing in s, M(0) = C.
inline double M_alpha(double s, double alpha, double C = 1.0) {
    require_alpha(alpha);
    if (!(s >= 0.0)) throw ConfigError("M_alpha requires s >= 0");
    const double l = std::log1p(s / pi);
    if (std::abs(alpha + 1.0) < 1e-9) return C * (1.0 + (alpha + 2.0) * l);
    return C * (1.0 + (alpha + 2.0) / (alpha + 1.0) * std::expm1((alpha + 1.0) * l));
}

// M_alpha evaluated at s = rho0(t): (C/(alpha+1)) ((alpha+2) t^{-(alpha+1)/(alpha+2)} - 1),
// with boundary limit C (1 + log(1/t)).
inline double M_alpha_ball(double t, double alpha, double C = 1.0) {
    require_alpha(alpha);
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("M_alpha_ball requires t in (0,1]");
    if (std::abs(alpha + 1.0) < 1e-9) return C * (1.0 - std::log(t));
    const double q = (alpha + 1.0) / (alpha + 2.0);
    return C / (alpha + 1.0) * ((alpha + 2.0) * std::pow(t, -q) - 1.0);
}

// A(s,t) = t (pi + s) + (pi/(alpha+1)) ((1+s/pi)^{-alpha-1} - (alpha+2) t^{(alpha+1)/(alpha+2)}).
// Convex in s with minimum value 0 at s = rho0(t). alpha > -1.
inline double A_deficit(double s, double t, double alpha) {
    if (!(alpha > -1.0)) throw ConfigError("A_deficit requires alpha > -1");
    if (!(s >= 0.0)) throw ConfigError("A_deficit requires s >= 0");
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("A_deficit requires t in (0,1]");
    const double q = (alpha + 1.0) / (alpha + 2.0);
    return t * (pi + s) +
           pi / (alpha + 1.0) *
               (std::pow(1.0 + s / pi, -(alpha + 1.0)) - (alpha + 2.0) * std::pow(t, q));
}

}  // namespace bergmanlab::forms
