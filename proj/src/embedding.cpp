#include "prism/embedding.hpp"

#include <cmath>

#include "prism/errors.hpp"
#include "prism/text.hpp"

namespace prism::exemplars {

MockEmbeddingProvider::MockEmbeddingProvider(int dimension, std::uint64_t hash_seed)
    : dimension_(dimension), hash_seed_(hash_seed) {
    if (dimension < 1) {
        throw ArgumentError("embedding dimension must be positive");
    }
}

std::vector<double> MockEmbeddingProvider::embed(const std::string& text) {
    if (text.empty()) {
        throw ArgumentError("cannot embed empty text");
    }
    const auto tokens = text::tokenize_lower(text);
    if (tokens.empty()) {
        throw ArgumentError("cannot embed text without tokens");
    }

    std::vector<double> counts(static_cast<std::size_t>(dimension_), 0.0);
    for (const std::string& token : tokens) {
        const auto bucket = text::fnv1a64(token, hash_seed_) % static_cast<std::uint64_t>(dimension_);
        counts[static_cast<std::size_t>(bucket)] += 1.0;
    }
    double norm = 0.0;
    for (double c : counts) {
        norm += c * c;
    }
    norm = std::sqrt(norm);
    for (double& c : counts) {
        c /= norm;
    }
    return counts;
}

}  // namespace prism::exemplars
