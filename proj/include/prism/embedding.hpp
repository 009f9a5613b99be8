#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prism::exemplars {

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual int dimension() const = 0;
    /// Embeds non-empty text into a fixed-dimension vector. Unit-normalized
    /// providers return a norm of 1 within 1e-9; precision narrows to float32
    /// only when vectors enter an index.
    virtual std::vector<double> embed(const std::string& text) = 0;
};

/// Deterministic offline embedder: hashed bag-of-words over lowercase
/// alphanumeric tokens, bucketed by a seeded 64-bit hash, scaled to unit L2
/// norm. Order-insensitive, and shared tokens between two texts pull their
/// vectors together, which is enough geometry for retrieval tests.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    static constexpr int kDefaultDimension = 256;
    static constexpr std::uint64_t kDefaultHashSeed = 0x505249534d303031ull;

    explicit MockEmbeddingProvider(int dimension = kDefaultDimension,
                                   std::uint64_t hash_seed = kDefaultHashSeed);

    std::string id() const override { return "mock"; }
    int dimension() const override { return dimension_; }
    std::vector<double> embed(const std::string& text) override;

private:
    int dimension_;
    std::uint64_t hash_seed_;
};

}  // namespace prism::exemplars
