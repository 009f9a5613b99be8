#include "prism/weights.hpp"

#include <cmath>
#include <string>

#include "prism/errors.hpp"

namespace prism::prompts {

WeightMap validate_weights(const std::map<corpus::DocType, double>& raw) {
    std::array<double, 5> original{};
    double sum = 0.0;
    for (corpus::DocType type : corpus::kAllDocTypes) {
        auto it = raw.find(type);
        if (it == raw.end()) {
            throw ContractViolation("missing weight for doc type '" +
                                    std::string(corpus::to_string(type)) + "'");
        }
        const double value = it->second;
        if (!std::isfinite(value)) {
            throw ContractViolation("non-finite weight for doc type '" +
                                    std::string(corpus::to_string(type)) + "'");
        }
        if (value < 0.0) {
            throw ContractViolation("negative weight for doc type '" +
                                    std::string(corpus::to_string(type)) + "'");
        }
        original[corpus::doc_type_ordinal(type)] = value;
        sum += value;
    }
    if (sum <= 0.0) {
        throw ContractViolation("weights sum to zero");
    }
    for (double& value : original) {
        value /= sum;
    }

    // Iteratively floor sub-0.1 weights, redistributing the leftover mass over
    // the unfloored types proportionally to their original shares. At most 4
    // types can sit below 0.1 of a unit-sum map, so this terminates quickly.
    std::array<bool, 5> floored{};
    WeightMap result;
    result.values = original;
    for (;;) {
        bool changed = false;
        for (std::size_t i = 0; i < 5; ++i) {
            if (!floored[i] && result.values[i] < kWeightFloor - 1e-12) {
                floored[i] = true;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        double floor_mass = 0.0;
        double unfloored_original = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            if (floored[i]) {
                floor_mass += kWeightFloor;
            } else {
                unfloored_original += original[i];
            }
        }
        const double remaining = 1.0 - floor_mass;
        for (std::size_t i = 0; i < 5; ++i) {
            result.values[i] =
                floored[i] ? kWeightFloor : original[i] * remaining / unfloored_original;
        }
    }
    return result;
}

}  // namespace prism::prompts
