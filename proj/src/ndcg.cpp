#include "prism/ndcg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "prism/errors.hpp"

namespace prism::eval {

namespace {

double contribution(int gain, GainScheme scheme) {
    if (scheme == GainScheme::Exponential) {
        return std::exp2(static_cast<double>(gain)) - 1.0;
    }
    return static_cast<double>(gain);
}

double dcg(std::span<const int> gains_in_rank_order, int k, GainScheme scheme) {
    double sum = 0.0;
    const auto limit = std::min<std::size_t>(static_cast<std::size_t>(k),
                                             gains_in_rank_order.size());
    for (std::size_t i = 0; i < limit; ++i) {
        sum += contribution(gains_in_rank_order[i], scheme) /
               std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
}

}  // namespace

double ndcg_at_k(std::span<const int> predicted, std::span<const int> gains, int k,
                 GainScheme scheme) {
    if (k < 1) {
        throw ArgumentError("ndcg_at_k requires k >= 1");
    }
    if (predicted.size() != gains.size()) {
        throw ArgumentError("predicted ranking and gains differ in length");
    }
    for (int g : gains) {
        if (g < 0) {
            throw ArgumentError("gains must be non-negative");
        }
    }
    std::vector<char> seen(predicted.size(), 0);
    for (int index : predicted) {
        if (index < 0 || static_cast<std::size_t>(index) >= gains.size() || seen[index]) {
            throw ArgumentError("predicted ranking is not a permutation of the candidates");
        }
        seen[index] = 1;
    }

    std::vector<int> predicted_gains;
    predicted_gains.reserve(predicted.size());
    for (int index : predicted) {
        predicted_gains.push_back(gains[static_cast<std::size_t>(index)]);
    }
    std::vector<int> ideal(gains.begin(), gains.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());

    const double ideal_dcg = dcg(ideal, k, scheme);
    if (ideal_dcg == 0.0) {
        return 0.0;
    }
    return dcg(predicted_gains, k, scheme) / ideal_dcg;
}

}  // namespace prism::eval
