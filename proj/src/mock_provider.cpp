#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prism/doc_type.hpp"
#include "prism/errors.hpp"
#include "prism/provider.hpp"
#include "prism/text.hpp"

namespace prism::provider {

using nlohmann::json;

namespace {

struct PromptView {
    std::string question;
    std::vector<std::pair<int, std::string>> candidates;  // [index] line text
};

// Recovers the question and candidate lines from the rendered user prompt.
// Rendering guarantees a `Question: ...` line and `[i] ...` candidate lines.
PromptView scan_user_prompt(const std::string& user_prompt) {
    PromptView view;
    std::istringstream in(user_prompt);
    std::string line;
    while (std::getline(in, line)) {
        if (view.question.empty() && line.rfind("Question: ", 0) == 0) {
            view.question = line.substr(10);
            continue;
        }
        if (line.size() >= 3 && line[0] == '[') {
            const std::size_t close = line.find(']');
            if (close == std::string::npos || close == 1) {
                continue;
            }
            const std::string digits = line.substr(1, close - 1);
            if (!std::all_of(digits.begin(), digits.end(),
                             [](unsigned char c) { return std::isdigit(c); })) {
                continue;
            }
            std::string text = line.substr(close + 1);
            if (!text.empty() && text.front() == ' ') {
                text.erase(text.begin());
            }
            view.candidates.emplace_back(std::stoi(digits), std::move(text));
        }
    }
    return view;
}

double overlap_ratio(const std::string& query, const std::string& candidate_text) {
    const auto query_tokens = text::tokenize_lower(query);
    if (query_tokens.empty()) {
        return 0.0;
    }
    const auto candidate_tokens = text::tokenize_lower(candidate_text);
    const std::set<std::string> candidate_set(candidate_tokens.begin(), candidate_tokens.end());
    const std::set<std::string> query_set(query_tokens.begin(), query_tokens.end());
    std::size_t covered = 0;
    for (const std::string& token : query_set) {
        if (candidate_set.contains(token)) {
            ++covered;
        }
    }
    return static_cast<double>(covered) / static_cast<double>(query_set.size());
}

// Static domain vocabulary the analyzer mock uses to spread weights.
const std::array<std::pair<corpus::DocType, const char*>, 5> kAnalyzerDomains = {{
    {corpus::DocType::Def14A,
     "proxy statements governance executive compensation board matters shareholder voting"},
    {corpus::DocType::TenK,
     "annual report comprehensive business overview risk factors financials strategy"},
    {corpus::DocType::TenQ,
     "quarterly report recent performance interim financials operational updates"},
    {corpus::DocType::EightK,
     "current report material events breaking news significant changes announcements"},
    {corpus::DocType::Earnings,
     "earnings call management guidance recent performance discussion analysts"},
}};

}  // namespace

int mock_score(const std::string& query, const std::string& candidate_text,
               std::uint64_t seed) {
    const double ratio = overlap_ratio(query, candidate_text);
    const int base = static_cast<int>(std::lround(1.0 + ratio * 9.0));

    std::uint64_t key = text::fnv1a64(query, text::kFnvOffset ^ seed);
    key = text::fnv1a64("\x1f", key);
    key = text::fnv1a64(candidate_text, key);
    const int perturbation = static_cast<int>(key % 3) - 1;

    return std::clamp(base + perturbation, 1, 10);
}

MockChatProvider::MockChatProvider(std::uint64_t seed) : seed_(seed) {}

RawCompletion MockChatProvider::complete_once(const ChatRequest& request) {
    if (transport_failures_.load() > 0) {
        --transport_failures_;
        throw TransportError("injected transport failure");
    }
    if (garbage_responses_.load() > 0) {
        --garbage_responses_;
        RawCompletion raw;
        raw.text = "The ranking could not be expressed in the requested format.";
        raw.usage = {static_cast<std::int64_t>(
                         (request.system_prompt.size() + request.user_prompt.size()) / 4 + 1),
                     16};
        raw.synthetic_latency_ms = 1;
        return raw;
    }

    const PromptView view = scan_user_prompt(request.user_prompt);
    const std::uint64_t agent_seed = seed_ ^ text::fnv1a64(request.system_prompt);

    json payload;
    if (request.schema_id == "weights_v1") {
        double total = 0.0;
        std::array<double, 5> raw_weights{};
        for (const auto& [type, vocabulary] : kAnalyzerDomains) {
            const double score = mock_score(view.question, vocabulary, seed_);
            raw_weights[corpus::doc_type_ordinal(type)] = score;
            total += score;
        }
        json weights = json::object();
        for (corpus::DocType type : corpus::kAllDocTypes) {
            weights[std::string(corpus::to_string(type))] =
                raw_weights[corpus::doc_type_ordinal(type)] / total;
        }
        payload["weights"] = std::move(weights);
        payload["reasoning"] = "token-overlap weighting";
    } else {
        json scores = json::array();
        std::vector<int> kept;
        for (const auto& [index, text_line] : view.candidates) {
            const int score =
                mock_score(view.question, text_line + " " + request.system_prompt, agent_seed);
            scores.push_back({{"chunk_index", index},
                              {"relevance_score", score},
                              {"reasoning", "token-overlap heuristic"}});
            if (score >= 5) {
                kept.push_back(index);
            }
        }
        payload["scores"] = std::move(scores);
        if (request.schema_id == "filter_v1") {
            payload["filtered_indices"] = std::move(kept);
        }
    }

    RawCompletion raw;
    raw.text = payload.dump();
    raw.usage = {static_cast<std::int64_t>(
                     (request.system_prompt.size() + request.user_prompt.size()) / 4 + 1),
                 static_cast<std::int64_t>(raw.text.size() / 4 + 1)};
    raw.synthetic_latency_ms =
        1 + static_cast<std::int64_t>(text::fnv1a64(request.user_prompt, seed_) % 49);
    return raw;
}

}  // namespace prism::provider
