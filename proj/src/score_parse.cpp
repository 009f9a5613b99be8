#include "prism/score_parse.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "prism/errors.hpp"

namespace prism::prompts {

using nlohmann::json;

namespace {

// Finds the earliest balanced {...} span that parses as JSON, skipping over
// string literals and escapes while matching braces.
std::optional<json> extract_json_object(const std::string& raw) {
    for (std::size_t start = raw.find('{'); start != std::string::npos;
         start = raw.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            const char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    json parsed = json::parse(raw.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) {
                        return parsed;
                    }
                    break;  // balanced but unparseable; try the next '{'
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<int> coerce_index(const json& value) {
    if (value.is_number_integer()) {
        return value.get<int>();
    }
    if (value.is_number_float()) {
        const double d = value.get<double>();
        if (d == std::floor(d)) {
            return static_cast<int>(d);
        }
    }
    return std::nullopt;
}

}  // namespace

ScoreList parse_scores(const std::string& raw, const std::set<int>& expected_indices,
                       const std::string& schema_id) {
    if (expected_indices.empty()) {
        throw ArgumentError("parse_scores requires a non-empty expected index set");
    }

    auto payload = extract_json_object(raw);
    if (!payload) {
        throw ParseFailure("no well-formed JSON object in model output");
    }

    ScoreList out;
    auto note = [&out](std::string message) {
        out.repaired = true;
        out.repair_log.push_back(std::move(message));
    };

    std::set<int> seen;
    if (auto scores_it = payload->find("scores");
        scores_it != payload->end() && scores_it->is_array()) {
        for (const json& entry : *scores_it) {
            if (!entry.is_object()) {
                note("dropped non-object score entry");
                continue;
            }
            auto index_it = entry.find("chunk_index");
            std::optional<int> index =
                index_it == entry.end() ? std::nullopt : coerce_index(*index_it);
            if (!index) {
                note("dropped score entry without usable chunk_index");
                continue;
            }
            if (!expected_indices.contains(*index)) {
                note("dropped unexpected index " + std::to_string(*index));
                continue;
            }
            if (!seen.insert(*index).second) {
                note("dropped duplicate index " + std::to_string(*index));
                continue;
            }

            ScoreEntry score_entry;
            score_entry.chunk_index = *index;
            auto score_it = entry.find("relevance_score");
            if (score_it != entry.end() && score_it->is_number()) {
                const double value = score_it->get<double>();
                const int rounded = static_cast<int>(std::lround(value));
                score_entry.relevance_score = std::clamp(rounded, 1, 10);
                if (score_entry.relevance_score != value) {
                    note("clamped score " + std::to_string(value) + " for index " +
                         std::to_string(*index));
                }
            } else {
                score_entry.relevance_score = 1;
                note("missing or invalid relevance_score for index " + std::to_string(*index) +
                     ", defaulted to 1");
            }
            if (auto reasoning_it = entry.find("reasoning");
                reasoning_it != entry.end() && reasoning_it->is_string()) {
                score_entry.reasoning = reasoning_it->get<std::string>();
            }
            out.scores.push_back(std::move(score_entry));
        }
    }

    if (out.scores.empty()) {
        throw ContractViolation("payload holds no usable score entries");
    }

    for (int expected : expected_indices) {
        if (!seen.contains(expected)) {
            out.scores.push_back({expected, 1, "repaired: missing"});
            note("appended missing index " + std::to_string(expected) + " with score 1");
        }
    }

    if (schema_id == "filter_v1") {
        if (auto filtered_it = payload->find("filtered_indices");
            filtered_it != payload->end() && filtered_it->is_array()) {
            std::vector<int> kept;
            std::set<int> kept_seen;
            for (const json& value : *filtered_it) {
                auto index = coerce_index(value);
                if (!index || !expected_indices.contains(*index)) {
                    note("dropped invalid filtered index");
                    continue;
                }
                if (kept_seen.insert(*index).second) {
                    kept.push_back(*index);
                }
            }
            out.filtered_indices = std::move(kept);
        } else {
            note("filter payload missing filtered_indices; treating as keep-all");
        }
    }
    return out;
}

std::map<corpus::DocType, double> parse_weights(const std::string& raw) {
    auto payload = extract_json_object(raw);
    if (!payload) {
        throw ParseFailure("no well-formed JSON object in model output");
    }
    const json* weights = payload.operator->();
    if (auto it = payload->find("weights"); it != payload->end() && it->is_object()) {
        weights = &*it;
    }

    std::map<corpus::DocType, double> out;
    for (const auto& [key, value] : weights->items()) {
        auto type = corpus::doc_type_from_string(key);
        if (!type) {
            continue;
        }
        if (!value.is_number()) {
            throw ContractViolation("weight for '" + key + "' is not numeric");
        }
        out[*type] = value.get<double>();
    }
    for (corpus::DocType type : corpus::kAllDocTypes) {
        if (!out.contains(type)) {
            throw ContractViolation("weights payload missing doc type '" +
                                    std::string(corpus::to_string(type)) + "'");
        }
    }
    return out;
}

}  // namespace prism::prompts
