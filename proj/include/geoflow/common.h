/// @file common.h
/// @brief Shared error types, numeric constants, and tiny helpers.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace geoflow {

// Exit-code contract (CLI): 0 success, 2 usage/config, 3 numerical abort.
// ConfigError maps to 2, NumericError to 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.141592653589793238462643383279502884;

// Metric-inversion eigenvalue floor: degenerate points raise, never regularize.
constexpr double kEpsInv = 1e-10;
// Chart guard distance from sphere-chart poles (radians).
constexpr double kEpsChart = 1e-3;
// Entrywise denominator mask threshold for the path-ratio loss.
constexpr double kEpsDen = 1e-6;
// Centered finite-difference step shared by every oracle (chart units).
constexpr double kFdStep = 1e-4;
// Floor for conformal factors before they enter curvature formulas.
constexpr double kPsiMin = 0.1;
// Chart half-width: the squashed chart is (-w, w)^d with w = pi - 3 eps_chart,
// so mapped angles pi/2 + u/2 keep sin(angle) above the pole guard.
constexpr double kChartHalfWidth = kPi - 3.0 * kEpsChart;

inline double sq(double x) { return x * x; }

}  // namespace geoflow
