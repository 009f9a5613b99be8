#include "prism/agents.hpp"

#include <algorithm>
#include <future>

#include "prism/errors.hpp"
#include "prism/log.hpp"
#include "prism/weights.hpp"

namespace prism::agents {

std::string_view to_string(Architecture architecture) {
    switch (architecture) {
        case Architecture::DocEnsemble: return "DocEnsemble";
        case Architecture::A1: return "A1";
        case Architecture::A2: return "A2";
        case Architecture::A3: return "A3";
        case Architecture::A4: return "A4";
    }
    return "?";
}

std::optional<Architecture> architecture_from_string(std::string_view text) {
    if (text == "DocEnsemble") return Architecture::DocEnsemble;
    if (text == "A1") return Architecture::A1;
    if (text == "A2") return Architecture::A2;
    if (text == "A3") return Architecture::A3;
    if (text == "A4") return Architecture::A4;
    return std::nullopt;
}

GraphConfig make_graph(Architecture architecture) {
    GraphConfig config;
    config.architecture = architecture;
    auto add = [&config](std::string agent_id, std::string prompt_id, int stage,
                         AgentKind kind,
                         std::optional<corpus::DocType> doc_type = std::nullopt) {
        config.agents.push_back(
            {std::move(agent_id), std::move(prompt_id), stage, kind, doc_type});
    };

    switch (architecture) {
        case Architecture::DocEnsemble:
            add("analyzer", "doc.analyzer", 0, AgentKind::Analyzer);
            add("expert.def14a", "doc.expert.def14a", 1, AgentKind::Expert,
                corpus::DocType::Def14A);
            add("expert.10k", "doc.expert.10k", 1, AgentKind::Expert, corpus::DocType::TenK);
            add("expert.10q", "doc.expert.10q", 1, AgentKind::Expert, corpus::DocType::TenQ);
            add("expert.8k", "doc.expert.8k", 1, AgentKind::Expert, corpus::DocType::EightK);
            add("expert.earnings", "doc.expert.earnings", 1, AgentKind::Expert,
                corpus::DocType::Earnings);
            break;
        case Architecture::A1:
            add("ceo", "chunk.a1.ceo", 0, AgentKind::Scorer);
            add("financial_analyst", "chunk.a1.financial_analyst", 0, AgentKind::Scorer);
            add("operation_manager", "chunk.a1.operation_manager", 0, AgentKind::Scorer);
            add("risk_analyst", "chunk.a1.risk_analyst", 0, AgentKind::Scorer);
            break;
        case Architecture::A2:
            add("noise_remover", "chunk.a2.noise_remover", 0, AgentKind::Filter);
            add("candidate_selector", "chunk.a2.candidate_selector", 1, AgentKind::Selector);
            add("relevance_scorer", "chunk.a2.relevance_scorer", 2, AgentKind::Scorer);
            add("contextual_reasoner", "chunk.a2.contextual_reasoner", 2, AgentKind::Scorer);
            add("evidence_extractor", "chunk.a2.evidence_extractor", 2, AgentKind::Scorer);
            add("diversity", "chunk.a2.diversity", 2, AgentKind::Diversity);
            break;
        case Architecture::A3:
            add("quick_filter", "chunk.a3.quick_filter", 0, AgentKind::Filter);
            add("relevance_scorer", "chunk.a3.relevance_scorer", 1, AgentKind::Scorer);
            add("contextual_reasoner", "chunk.a3.contextual_reasoner", 1, AgentKind::Scorer);
            add("evidence_extractor", "chunk.a3.evidence_extractor", 1, AgentKind::Scorer);
            break;
        case Architecture::A4:
            add("financial_analyst", "chunk.a4.financial_analyst", 0, AgentKind::Scorer);
            add("risk_analyst", "chunk.a4.risk_analyst", 0, AgentKind::Scorer);
            break;
    }
    return config;
}

namespace {

bool is_scoring_kind(AgentKind kind) {
    return kind == AgentKind::Scorer || kind == AgentKind::Diversity ||
           kind == AgentKind::Expert;
}

std::map<int, std::vector<const AgentSpec*>> stages_of(const GraphConfig& config) {
    std::map<int, std::vector<const AgentSpec*>> stages;
    for (const AgentSpec& spec : config.agents) {
        stages[spec.stage].push_back(&spec);
    }
    for (auto& [_, specs] : stages) {
        std::sort(specs.begin(), specs.end(), [](const AgentSpec* a, const AgentSpec* b) {
            return a->agent_id < b->agent_id;
        });
    }
    return stages;
}

void expect_shape(bool condition, const GraphConfig& config, const char* what) {
    if (!condition) {
        throw ConfigError(std::string("graph ") + std::string(to_string(config.architecture)) +
                          ": " + what);
    }
}

}  // namespace

void validate_graph(const GraphConfig& config) {
    std::set<std::string> ids;
    for (const AgentSpec& spec : config.agents) {
        expect_shape(ids.insert(spec.agent_id).second, config, "duplicate agent id");
    }
    auto stages = stages_of(config);

    auto count_kind = [&stages](int stage, AgentKind kind) {
        std::size_t n = 0;
        auto it = stages.find(stage);
        if (it == stages.end()) return n;
        for (const AgentSpec* spec : it->second) {
            if (spec->kind == kind) ++n;
        }
        return n;
    };

    switch (config.architecture) {
        case Architecture::DocEnsemble: {
            expect_shape(stages.size() == 2, config, "expects two stages");
            expect_shape(count_kind(0, AgentKind::Analyzer) == 1 && stages[0].size() == 1,
                         config, "stage 0 must be a single analyzer");
            expect_shape(count_kind(1, AgentKind::Expert) == 5 && stages[1].size() == 5,
                         config, "stage 1 must be five experts");
            std::set<corpus::DocType> types;
            for (const AgentSpec* spec : stages[1]) {
                expect_shape(spec->doc_type.has_value(), config, "expert missing doc type");
                types.insert(*spec->doc_type);
            }
            expect_shape(types.size() == 5, config, "experts must cover each doc type once");
            break;
        }
        case Architecture::A1:
            expect_shape(stages.size() == 1 && count_kind(0, AgentKind::Scorer) == 4 &&
                             stages.begin()->second.size() == 4,
                         config, "expects one stage of four scorers");
            break;
        case Architecture::A2:
            expect_shape(stages.size() == 3, config, "expects three stages");
            expect_shape(count_kind(0, AgentKind::Filter) == 1 && stages[0].size() == 1,
                         config, "stage 0 must be a single noise filter");
            expect_shape(count_kind(1, AgentKind::Selector) == 1 && stages[1].size() == 1,
                         config, "stage 1 must be a single candidate selector");
            expect_shape(count_kind(2, AgentKind::Scorer) == 3 &&
                             count_kind(2, AgentKind::Diversity) == 1 && stages[2].size() == 4,
                         config, "stage 2 must be three scorers plus a diversity agent");
            break;
        case Architecture::A3:
            expect_shape(stages.size() == 2, config, "expects two stages");
            expect_shape(count_kind(0, AgentKind::Filter) == 1 && stages[0].size() == 1,
                         config, "stage 0 must be a single quick filter");
            expect_shape(count_kind(1, AgentKind::Scorer) == 3 && stages[1].size() == 3,
                         config, "stage 1 must be three scorers");
            break;
        case Architecture::A4:
            expect_shape(stages.size() == 1 && count_kind(0, AgentKind::Scorer) == 2 &&
                             stages.begin()->second.size() == 2,
                         config, "expects one stage of two scorers");
            break;
    }
}

std::vector<int> enforce_filter_floor(int total, std::vector<int> kept, int floor) {
    std::vector<int> deduped;
    std::set<int> seen;
    for (int index : kept) {
        if (index < 0 || index >= total) {
            throw ContractViolation("filtered index " + std::to_string(index) +
                                    " outside [0," + std::to_string(total) + ")");
        }
        if (seen.insert(index).second) {
            deduped.push_back(index);
        }
    }
    const int required = std::min(floor, total);
    if (static_cast<int>(deduped.size()) >= required) {
        return deduped;
    }
    log_warn("filter kept " + std::to_string(deduped.size()) + " of " + std::to_string(total) +
             " candidates, below the floor of " + std::to_string(required) +
             "; keeping all candidates");
    std::vector<int> all(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        all[static_cast<std::size_t>(i)] = i;
    }
    return all;
}

Ranking consensus(const ScoreMatrix& matrix,
                  const std::optional<std::map<std::string, double>>& agent_weights) {
    if (matrix.cells.empty()) {
        throw ArgumentError("consensus requires a non-empty score matrix");
    }
    if (agent_weights) {
        for (const auto& [agent_id, _] : matrix.cells) {
            auto it = agent_weights->find(agent_id);
            if (it == agent_weights->end()) {
                throw ArgumentError("missing consensus weight for agent '" + agent_id + "'");
            }
            if (!(it->second > 0.0)) {
                throw ArgumentError("consensus weight for agent '" + agent_id +
                                    "' must be positive");
            }
        }
        if (agent_weights->size() != matrix.cells.size()) {
            throw ArgumentError("consensus weights name agents absent from the matrix");
        }
    }

    std::set<int> candidates = matrix.declared_candidates;
    for (const auto& [_, row] : matrix.cells) {
        for (const auto& [index, _score] : row) {
            candidates.insert(index);
        }
    }

    Ranking ranking;
    ranking.architecture = "consensus";
    std::vector<std::pair<int, double>> aggregated;
    for (int candidate : candidates) {
        double weighted_sum = 0.0;
        double weight_total = 0.0;
        for (const auto& [agent_id, row] : matrix.cells) {
            auto cell = row.find(candidate);
            if (cell == row.end()) {
                continue;
            }
            const double weight = agent_weights ? agent_weights->at(agent_id) : 1.0;
            weighted_sum += weight * static_cast<double>(cell->second);
            weight_total += weight;
        }
        if (weight_total == 0.0) {
            const std::string message =
                "candidate " + std::to_string(candidate) + " has no scores; excluded";
            log_warn(message);
            ranking.warnings.push_back(message);
            continue;
        }
        aggregated.emplace_back(candidate, weighted_sum / weight_total);
    }

    std::sort(aggregated.begin(), aggregated.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [index, aggregate] : aggregated) {
        ranking.order.push_back(index);
        ranking.aggregates.push_back(aggregate);
    }
    return ranking;
}

namespace {

struct AgentOutcome {
    const AgentSpec* spec = nullptr;
    std::optional<prompts::ScoreList> scores;
    std::optional<std::map<corpus::DocType, double>> weights;  // analyzer only
    provider::Completion completion;
    std::string error;

    bool ok() const { return error.empty(); }
};

// Runs one agent call: render, complete (with parse retry), parse.
AgentOutcome run_agent(const AgentSpec& spec, const corpus::Sample& sample,
                       std::span<const corpus::Candidate> candidates, GraphRunContext& ctx) {
    AgentOutcome outcome;
    outcome.spec = &spec;
    try {
        const prompts::PromptTemplate& tmpl = ctx.templates.get(spec.prompt_id);
        const auto rendered = prompts::render_chat(tmpl, sample.query, candidates,
                                                   ctx.examples, ctx.render_options);
        provider::ChatRequest request;
        request.model_id = ctx.model_id;
        request.system_prompt = rendered.system_prompt;
        request.user_prompt = rendered.user_prompt;
        request.schema_id = tmpl.output_schema_id;

        if (spec.kind == AgentKind::Analyzer) {
            std::map<corpus::DocType, double> weights;
            outcome.completion = provider::complete(
                ctx.chat, request, ctx.policy,
                [&weights](const std::string& text) { weights = prompts::parse_weights(text); });
            outcome.weights = std::move(weights);
        } else {
            std::set<int> expected;
            for (const corpus::Candidate& c : candidates) {
                expected.insert(c.index);
            }
            prompts::ScoreList scores;
            outcome.completion = provider::complete(
                ctx.chat, request, ctx.policy,
                [&scores, &expected, &tmpl](const std::string& text) {
                    scores = prompts::parse_scores(text, expected, tmpl.output_schema_id);
                });
            outcome.scores = std::move(scores);
        }
    } catch (const Error& e) {
        outcome.error = e.what();
    }
    return outcome;
}

// Runs the stage's agents, at most ctx.parallelism at a time, collecting
// outcomes in agent order so aggregation is independent of completion order.
std::vector<AgentOutcome> run_stage(const std::vector<const AgentSpec*>& specs,
                                    const corpus::Sample& sample,
                                    const std::vector<corpus::Candidate>& candidates,
                                    GraphRunContext& ctx) {
    std::vector<AgentOutcome> outcomes(specs.size());
    if (ctx.parallelism <= 1 || specs.size() <= 1) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            outcomes[i] = run_agent(*specs[i], sample, candidates, ctx);
        }
        return outcomes;
    }

    const auto wave = static_cast<std::size_t>(ctx.parallelism);
    for (std::size_t begin = 0; begin < specs.size(); begin += wave) {
        const std::size_t end = std::min(begin + wave, specs.size());
        std::vector<std::future<AgentOutcome>> futures;
        futures.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                return run_agent(*specs[i], sample, candidates, ctx);
            }));
        }
        for (std::size_t i = begin; i < end; ++i) {
            outcomes[i] = futures[i - begin].get();
        }
    }
    return outcomes;
}

StageTraceEntry trace_of(const AgentOutcome& outcome, int stage, int survivors) {
    StageTraceEntry entry;
    entry.stage = stage;
    entry.agent_id = outcome.spec->agent_id;
    entry.survivors = survivors;
    entry.ok = outcome.ok();
    if (outcome.ok()) {
        entry.latency_ms = outcome.completion.latency_ms;
        entry.usage = outcome.completion.usage;
    }
    return entry;
}

}  // namespace

Ranking run_document_ranking(const corpus::Sample& sample, const GraphConfig& config,
                             GraphRunContext& ctx) {
    if (sample.task != corpus::Task::DocumentRanking) {
        throw ArgumentError("run_document_ranking requires a document sample");
    }
    if (config.architecture != Architecture::DocEnsemble) {
        throw ArgumentError("run_document_ranking requires the DocEnsemble graph");
    }
    validate_graph(config);

    Ranking ranking;
    ranking.architecture = std::string(to_string(config.architecture));
    auto stages = stages_of(config);

    // Stage 0: analyzer -> validated weights, uniform fallback on failure.
    prompts::WeightMap weights;
    weights.values = {0.2, 0.2, 0.2, 0.2, 0.2};
    {
        const auto outcomes = run_stage(stages[0], sample, sample.candidates, ctx);
        const AgentOutcome& analyzer = outcomes.front();
        if (analyzer.ok()) {
            try {
                weights = prompts::validate_weights(*analyzer.weights);
            } catch (const ContractViolation& e) {
                const std::string message =
                    std::string("analyzer weights rejected (") + e.what() +
                    "); falling back to uniform weights";
                log_warn(message);
                ranking.warnings.push_back(message);
            }
        } else {
            const std::string message = "analyzer failed (" + analyzer.error +
                                        "); falling back to uniform weights";
            log_warn(message);
            ranking.warnings.push_back(message);
        }
        ranking.trace.push_back(
            trace_of(analyzer, 0, static_cast<int>(sample.candidates.size())));
    }

    // Stage 1: each expert scores its own filing type.
    std::map<corpus::DocType, int> expert_scores;
    {
        const auto& specs = stages[1];
        std::vector<std::vector<corpus::Candidate>> expert_candidates(specs.size());
        for (std::size_t i = 0; i < specs.size(); ++i) {
            for (const corpus::Candidate& c : sample.candidates) {
                if (c.doc_type == specs[i]->doc_type) {
                    expert_candidates[i].push_back(c);
                }
            }
        }

        std::vector<AgentOutcome> outcomes(specs.size());
        if (ctx.parallelism <= 1) {
            for (std::size_t i = 0; i < specs.size(); ++i) {
                outcomes[i] = run_agent(*specs[i], sample, expert_candidates[i], ctx);
            }
        } else {
            const auto wave = static_cast<std::size_t>(ctx.parallelism);
            for (std::size_t begin = 0; begin < specs.size(); begin += wave) {
                const std::size_t end = std::min(begin + wave, specs.size());
                std::vector<std::future<AgentOutcome>> futures;
                for (std::size_t i = begin; i < end; ++i) {
                    futures.push_back(std::async(std::launch::async, [&, i] {
                        return run_agent(*specs[i], sample, expert_candidates[i], ctx);
                    }));
                }
                for (std::size_t i = begin; i < end; ++i) {
                    outcomes[i] = futures[i - begin].get();
                }
            }
        }

        for (const AgentOutcome& outcome : outcomes) {
            const corpus::DocType type = *outcome.spec->doc_type;
            if (outcome.ok() && !outcome.scores->scores.empty()) {
                expert_scores[type] = outcome.scores->scores.front().relevance_score;
            } else {
                const std::string message = "expert '" + outcome.spec->agent_id +
                                            "' failed; scoring " +
                                            std::string(corpus::to_string(type)) + " as 1";
                log_warn(message);
                ranking.warnings.push_back(message);
                expert_scores[type] = 1;
            }
            ranking.trace.push_back(
                trace_of(outcome, 1, static_cast<int>(sample.candidates.size())));
        }
    }

    // Final score per type: analyzer weight x expert score.
    std::vector<std::pair<const corpus::Candidate*, double>> scored;
    for (const corpus::Candidate& c : sample.candidates) {
        const corpus::DocType type = *c.doc_type;
        scored.emplace_back(&c, weights.at(type) * expert_scores.at(type));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return corpus::doc_type_ordinal(*a.first->doc_type) <
               corpus::doc_type_ordinal(*b.first->doc_type);
    });
    for (const auto& [candidate, score] : scored) {
        ranking.order.push_back(candidate->index);
        ranking.aggregates.push_back(score);
    }
    return ranking;
}

Ranking run_chunk_ranking(const corpus::Sample& sample, const GraphConfig& config,
                          GraphRunContext& ctx) {
    if (sample.task != corpus::Task::ChunkRanking) {
        throw ArgumentError("run_chunk_ranking requires a chunk sample");
    }
    if (config.architecture == Architecture::DocEnsemble) {
        throw ArgumentError("run_chunk_ranking requires a chunk graph (A1..A4)");
    }
    validate_graph(config);

    Ranking ranking;
    ranking.architecture = std::string(to_string(config.architecture));

    std::vector<corpus::Candidate> survivors = sample.candidates;
    std::optional<ScoreMatrix> last_matrix;

    for (auto& [stage, specs] : stages_of(config)) {
        const auto outcomes = run_stage(specs, sample, survivors, ctx);

        std::size_t failed = 0;
        for (const AgentOutcome& outcome : outcomes) {
            if (!outcome.ok()) {
                ++failed;
                const std::string message = "agent '" + outcome.spec->agent_id +
                                            "' failed in stage " + std::to_string(stage) +
                                            ": " + outcome.error;
                log_warn(message);
                ranking.warnings.push_back(message);
            }
        }
        if (failed == outcomes.size()) {
            throw EmptyStageError("stage " + std::to_string(stage) + " of " +
                                      std::string(to_string(config.architecture)) +
                                      ": all agents failed",
                                  stage);
        }

        const bool shrinking = std::any_of(specs.begin(), specs.end(), [](const AgentSpec* s) {
            return s->kind == AgentKind::Filter || s->kind == AgentKind::Selector;
        });

        if (shrinking) {
            // Union of the successful filters' keep sets, floored.
            std::set<int> kept_original;
            for (const AgentOutcome& outcome : outcomes) {
                if (!outcome.ok()) {
                    continue;
                }
                if (outcome.scores->filtered_indices) {
                    kept_original.insert(outcome.scores->filtered_indices->begin(),
                                         outcome.scores->filtered_indices->end());
                } else {
                    for (const corpus::Candidate& c : survivors) {
                        kept_original.insert(c.index);
                    }
                }
            }
            std::vector<int> kept_positions;
            for (std::size_t pos = 0; pos < survivors.size(); ++pos) {
                if (kept_original.contains(survivors[pos].index)) {
                    kept_positions.push_back(static_cast<int>(pos));
                }
            }
            const auto floored = enforce_filter_floor(
                static_cast<int>(survivors.size()), kept_positions, ctx.filter_floor);
            std::vector<corpus::Candidate> next;
            next.reserve(floored.size());
            for (int pos : floored) {
                next.push_back(survivors[static_cast<std::size_t>(pos)]);
            }
            survivors = std::move(next);
        } else {
            ScoreMatrix matrix;
            for (const corpus::Candidate& c : survivors) {
                matrix.declared_candidates.insert(c.index);
            }
            for (const AgentOutcome& outcome : outcomes) {
                if (!outcome.ok()) {
                    continue;
                }
                auto& row = matrix.cells[outcome.spec->agent_id];
                for (const prompts::ScoreEntry& entry : outcome.scores->scores) {
                    row[entry.chunk_index] = entry.relevance_score;
                }
            }
            last_matrix = std::move(matrix);
        }

        for (const AgentOutcome& outcome : outcomes) {
            ranking.trace.push_back(
                trace_of(outcome, stage, static_cast<int>(survivors.size())));
        }
    }

    if (!last_matrix) {
        throw ConfigError("graph has no scorer stage");
    }

    Ranking final_ranking = consensus(*last_matrix);
    final_ranking.architecture = ranking.architecture;
    final_ranking.trace = std::move(ranking.trace);
    for (std::string& warning : ranking.warnings) {
        final_ranking.warnings.push_back(std::move(warning));
    }

    // Candidates eliminated by filters come after the survivors, in original
    // index order, with a zero aggregate.
    std::set<int> ranked(final_ranking.order.begin(), final_ranking.order.end());
    for (const corpus::Candidate& c : sample.candidates) {
        if (!ranked.contains(c.index)) {
            final_ranking.order.push_back(c.index);
            final_ranking.aggregates.push_back(0.0);
        }
    }
    return final_ranking;
}

}  // namespace prism::agents
