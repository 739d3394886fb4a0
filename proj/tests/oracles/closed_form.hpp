#pragma once

#include <cmath>
#include <numbers>

namespace oracle {

/// e^{x^2} erfc(x), with an asymptotic series where erfc underflows.
inline double erfcx(double x) {
    if (x < 25.0) return std::exp(x * x) * std::erfc(x);
    const double q = 1.0 / (x * x);
    return (1.0 - 0.5 * q + 0.75 * q * q - 1.875 * q * q * q) / (x * std::sqrt(std::numbers::pi));
}

/// Scalar profile of the residual kernel R = r D for rank-one D with trace sigma:
/// r = e^{-sigma s} e^{nu(sigma^2 - |xi|^2) t} erfc(s / (2 sqrt(nu t)) - sigma sqrt(nu t)).
inline double residual_profile(double t, double nu, double xi2, double sigma, double s) {
    const double rt = std::sqrt(nu * t);
    const double x = s / (2.0 * rt) - sigma * rt;
    return std::exp(-s * s / (4.0 * nu * t) - nu * xi2 * t) * erfcx(x);
}

/// d/ds of residual_profile.
inline double residual_profile_ds(double t, double nu, double xi2, double sigma, double s) {
    const double g = std::exp(-s * s / (4.0 * nu * t) - nu * xi2 * t) / std::sqrt(std::numbers::pi * nu * t);
    return -sigma * residual_profile(t, nu, xi2, sigma, s) - g;
}

} // namespace oracle
