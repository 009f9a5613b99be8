#pragma once

#include <span>

namespace prism::eval {

/// How a graded gain contributes to DCG. Exponential is 2^gain - 1; Linear
/// is the raw gain.
enum class GainScheme { Exponential, Linear };

/// NDCG@k of a predicted ordering.
///
/// `predicted` must be a permutation of [0, gains.size()): candidate indices
/// in ranked order, best first. `gains[i]` is the relevance gain of candidate
/// index i (non-negative). DCG@k sums contribution(gain) / log2(rank + 1)
/// over the first k positions; the ideal DCG sorts gains descending. When
/// every gain is zero the result is 0 by convention.
double ndcg_at_k(std::span<const int> predicted, std::span<const int> gains, int k = 5,
                 GainScheme scheme = GainScheme::Exponential);

}  // namespace prism::eval
