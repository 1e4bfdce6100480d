#pragma once

#include <span>
#include <vector>

namespace adexsim {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double x_at_zero() const { return -intercept / slope; }
};

/// Ordinary least squares y = slope*x + intercept. Throws FitFailed for fewer
/// than two points or a degenerate x range.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct ExponentialFit {
    double tau = 0.0;       ///< decay time constant
    double amplitude = 0.0; ///< deflection at t = 0
    double r_squared = 0.0; ///< of the log-linear fit
};

/// Fits y(t) = amplitude * exp(-t/tau) by linear least squares on log|y|.
/// All y must share one sign and be nonzero.
ExponentialFit fit_exponential_decay(std::span<const double> t, std::span<const double> y);

double mean(std::span<const double> v);
/// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> v);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);
double median(std::vector<double> v);
/// std/mean; 0 when the mean is 0.
double coefficient_of_variation(std::span<const double> v);

} // namespace adexsim
