#include "prism/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "prism/errors.hpp"

namespace prism::utils {

double quantile_sorted(std::span<const double> sorted_values, double p) {
    if (sorted_values.empty()) {
        throw ArgumentError("quantile of empty range");
    }
    if (p < 0.0 || p > 1.0) {
        throw ArgumentError("quantile probability outside [0,1]");
    }
    const double h = static_cast<double>(sorted_values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

FiveNumber five_number_summary(std::vector<double> values) {
    if (values.empty()) {
        throw ArgumentError("five_number_summary of empty range");
    }
    std::sort(values.begin(), values.end());
    return FiveNumber{
        values.front(),
        quantile_sorted(values, 0.25),
        quantile_sorted(values, 0.5),
        quantile_sorted(values, 0.75),
        values.back(),
    };
}

}  // namespace prism::utils
