#pragma once

#include <span>
#include <vector>

namespace appshare::harness {

/// Linear interpolation between closest ranks; 0 for no samples.
double percentile(std::vector<double> samples, double p);

struct LinearFit
{
    double slope = 0;
    double intercept = 0;
    double r_squared = 1;
};

/// Ordinary least squares of ys against xs. r² is 1 when the residuals and
/// the total variance are both zero. Throws Error{TooFewRows} below 3 points.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

} // namespace appshare::harness
