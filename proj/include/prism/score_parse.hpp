#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prism/doc_type.hpp"

namespace prism::prompts {

struct ScoreEntry {
    int chunk_index = 0;
    int relevance_score = 1;  // always in [1,10]
    std::string reasoning;
};

struct ScoreList {
    std::vector<ScoreEntry> scores;
    std::optional<std::vector<int>> filtered_indices;  // filter_v1 only
    bool repaired = false;
    std::vector<std::string> repair_log;
};

/// Parses a structured score payload out of raw model text, tolerating
/// surrounding prose by extracting the outermost well-formed JSON object.
///
/// Repair rules (each one logged and flagged):
///   - out-of-range scores are clamped to [1,10];
///   - duplicate indices keep the first occurrence;
///   - indices outside expected_indices are dropped;
///   - expected indices that are missing are appended with score 1.
///
/// Throws ParseFailure when no JSON object can be extracted (retryable) and
/// ContractViolation when a payload exists but holds no usable score entry.
ScoreList parse_scores(const std::string& raw, const std::set<int>& expected_indices,
                       const std::string& schema_id);

/// Parses a weights_v1 payload: {"weights": {"DEF 14A": w, ...}, "reasoning": s}
/// (a bare type->weight object is also accepted). Missing doc types or
/// non-numeric weights raise ContractViolation.
std::map<corpus::DocType, double> parse_weights(const std::string& raw);

}  // namespace prism::prompts
