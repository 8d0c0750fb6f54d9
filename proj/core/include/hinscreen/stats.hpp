#pragma once

#include <span>
#include <vector>

namespace hinscreen::stats {

// Linear-interpolation quantile (the "type 7" rule: h = (n-1)*level) over an
// ascending-sorted sample. level must lie in [0,1]; the sample must be
// non-empty.
double sorted_quantile(std::span<const double> sorted, double level);

// Convenience overload that copies and sorts.
double quantile(std::vector<double> values, double level);

double mean(std::span<const double> values);

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

// Adjusted Fisher-Pearson skewness G1 = g1 * sqrt(n(n-1))/(n-2). Requires
// n >= 3; a zero second moment yields 0.
double adjusted_skewness(std::span<const double> values);

}  // namespace hinscreen::stats
