#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "prism/quantile.hpp"
#include "prism/sample.hpp"

namespace prism::corpus {

/// counts[doc_type_ordinal][rank-1] over document samples with a full
/// ground-truth ranking. Row and column sums both equal `tallied`.
struct RankDistribution {
    std::array<std::array<std::size_t, 5>, 5> counts{};
    std::size_t tallied = 0;
    std::size_t skipped = 0;
};

RankDistribution rank_distribution(const SampleSet& samples);

struct KeywordRatio {
    std::string keyword;
    double ratio = 0.0;      // fraction of rank-1 samples of this type containing it
    std::size_t count = 0;   // document frequency among those samples
};

using KeywordTable = std::map<DocType, std::vector<KeywordRatio>>;

/// For each doc type, the top_n query keywords (by ratio, then frequency,
/// then lexicographic) among samples whose rank-1 type is that type.
/// Tokenization: lowercase, split on non-alphanumerics, alphabetic tokens of
/// length >= 2, stopwords removed.
KeywordTable keyword_ratios(const SampleSet& samples,
                            const std::set<std::string>& stopwords,
                            std::size_t top_n);

enum class LengthUnit { Words, Tokens };

struct LengthSummary {
    std::string group;  // "relevant" | "irrelevant"
    std::size_t count = 0;
    utils::FiveNumber summary;
};

using LengthCounter = std::function<std::size_t(const std::string&)>;

/// Five-number chunk length summaries split by relevance (gain > 0 means
/// relevant). The Words unit defaults to plain word count; the Tokens unit
/// requires an explicit counter, since no offline tokenizer reproduces a
/// provider's token stream.
std::pair<LengthSummary, LengthSummary> length_stats(const SampleSet& samples,
                                                     LengthUnit unit,
                                                     LengthCounter counter = nullptr);

std::set<std::string> load_stopwords(const std::filesystem::path& path);

std::string rank_distribution_csv(const RankDistribution& table);
std::string keyword_table_csv(const KeywordTable& table);
std::string length_stats_csv(const LengthSummary& relevant, const LengthSummary& irrelevant);

}  // namespace prism::corpus
