#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prism/prompt.hpp"
#include "prism/provider.hpp"
#include "prism/sample.hpp"
#include "prism/score_parse.hpp"

namespace prism::agents {

enum class AgentKind { Analyzer, Expert, Filter, Selector, Scorer, Diversity };

/// Ranking graph topologies: the fixed document ensemble plus the four chunk
/// architectures, ordered from the four-scorer ensemble down to the minimal
/// two-scorer pair.
enum class Architecture { DocEnsemble, A1, A2, A3, A4 };

std::string_view to_string(Architecture architecture);
std::optional<Architecture> architecture_from_string(std::string_view text);

struct AgentSpec {
    std::string agent_id;
    std::string prompt_id;  // template id in the registry
    int stage = 0;
    AgentKind kind = AgentKind::Scorer;
    std::optional<corpus::DocType> doc_type;  // document experts only
};

/// Agents grouped into ordered stages; agents sharing a stage may run in
/// parallel, stages are sequential barriers.
struct GraphConfig {
    Architecture architecture = Architecture::A4;
    std::vector<AgentSpec> agents;
};

/// The standard topology for an architecture, wired to the shipped role
/// prompts.
GraphConfig make_graph(Architecture architecture);

/// Checks the structural invariants (stage shapes, one expert per doc type,
/// unique agent ids). Throws ConfigError on violation.
void validate_graph(const GraphConfig& config);

/// Rows are agents, columns are candidate indices; a missing cell means the
/// agent did not score that candidate.
struct ScoreMatrix {
    std::map<std::string, std::map<int, int>> cells;  // agent_id -> index -> score
    std::set<int> declared_candidates;                // optional; derived from cells if empty
};

struct StageTraceEntry {
    int stage = 0;
    std::string agent_id;
    int survivors = 0;  // candidates alive after the stage
    std::int64_t latency_ms = 0;
    provider::Usage usage;
    bool ok = true;
};

/// An ordered candidate list, best first, with the aggregate score that put
/// each candidate there and the stage trace that produced it.
struct Ranking {
    std::vector<int> order;
    std::vector<double> aggregates;  // non-increasing, aligned with order
    std::string architecture;
    std::vector<StageTraceEntry> trace;
    std::vector<std::string> warnings;
};

inline constexpr int kDefaultFilterFloor = 100;

struct GraphRunContext {
    provider::ChatProvider& chat;
    const prompts::TemplateRegistry& templates;
    provider::RetryPolicy policy{};
    std::string model_id = "mock";
    std::optional<std::string> examples;  // few-shot block for the {examples} slot
    int parallelism = 4;                  // <= 1 runs agents sequentially
    int filter_floor = kDefaultFilterFloor;
    prompts::RenderOptions render_options{};
};

/// Question Analyzer -> validated weights, five Document Experts -> own-type
/// scores, final score = weight x expert score. Analyzer failure falls back
/// to uniform weights; a failed expert scores its type 1. Ties break in
/// canonical DocType order.
Ranking run_document_ranking(const corpus::Sample& sample, const GraphConfig& config,
                             GraphRunContext& ctx);

/// Executes the staged chunk graph: filter/selector stages shrink the
/// candidate set (subject to the filter floor), scorer stages build a score
/// matrix, and the final ranking is the consensus over the last scorer stage
/// with eliminated candidates appended in original index order.
Ranking run_chunk_ranking(const corpus::Sample& sample, const GraphConfig& config,
                          GraphRunContext& ctx);

/// Weighted arithmetic mean over the agents that scored each candidate
/// (unweighted when no weights are given), sorted descending with ascending
/// candidate index as the tie-break.
Ranking consensus(const ScoreMatrix& matrix,
                  const std::optional<std::map<std::string, double>>& agent_weights =
                      std::nullopt);

/// The conservative keep rule: a filter must retain at least min(floor, total)
/// candidates, otherwise its output is overridden and every candidate is
/// kept. Indices are positions in [0, total).
std::vector<int> enforce_filter_floor(int total, std::vector<int> kept,
                                      int floor = kDefaultFilterFloor);

}  // namespace prism::agents
