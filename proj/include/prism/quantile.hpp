#pragma once

#include <span>
#include <vector>

namespace prism::utils {

/// Quantile by linear interpolation between closest ranks: with n sorted
/// values the p-quantile sits at position h = (n-1)*p and interpolates
/// between the neighbouring order statistics. Requires sorted, non-empty
/// input and p in [0,1].
double quantile_sorted(std::span<const double> sorted_values, double p);

struct FiveNumber {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

/// Sorts a copy of `values` and reads the five-number summary off it.
FiveNumber five_number_summary(std::vector<double> values);

}  // namespace prism::utils
