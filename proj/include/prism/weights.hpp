#pragma once

#include <array>
#include <map>

#include "prism/doc_type.hpp"

namespace prism::prompts {

/// Per-DocType ensemble weights. After validation the weights sum to 1.0
/// (within 1e-9) and every weight is at least 0.1.
struct WeightMap {
    std::array<double, 5> values{};  // indexed by doc_type_ordinal

    double at(corpus::DocType type) const { return values[corpus::doc_type_ordinal(type)]; }
    double& at(corpus::DocType type) { return values[corpus::doc_type_ordinal(type)]; }
};

/// Normalizes raw analyzer weights and enforces the 0.1 floor: weights below
/// the floor are raised to it and the remaining mass is redistributed over
/// the other types in proportion to their original weights (iterating in case
/// the redistribution pushes another weight under the floor).
///
/// Throws ContractViolation for a missing doc type, a negative or non-finite
/// weight, or an all-zero map.
WeightMap validate_weights(const std::map<corpus::DocType, double>& raw);

inline constexpr double kWeightFloor = 0.1;

}  // namespace prism::prompts
