#pragma once

#include <cstddef>
#include <span>

namespace fpdiff {

/// Least-squares line through (log x, log y).
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    /// Every y was zero: the quantity does not vary, slope is +infinity.
    bool identically_zero = false;
};

/// Fits log y = slope * log x + intercept over the pairs with x > 0, y > 0.
/// All-zero y gives identically_zero with slope = +inf. Throws DegenerateFit
/// when fewer than two usable points remain or all usable x coincide.
ExponentFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Same regression on (n, log y): returns log-rate as slope, i.e. y ~ C exp(slope * n).
ExponentFit fit_loglinear(std::span<const double> n, std::span<const double> y);

} // namespace fpdiff
