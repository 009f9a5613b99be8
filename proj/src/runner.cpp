#include "prism/runner.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "prism/errors.hpp"
#include "prism/ndcg.hpp"
#include "prism/text.hpp"

namespace prism::runner {

using nlohmann::json;

namespace {

struct SampleResult {
    std::string sample_id;
    std::vector<int> ranking;
    std::vector<double> aggregates;
    bool failed = false;
    std::string failure_reason;
    std::vector<telemetry::CallRecord> calls;
    std::optional<json> trace;
};

json trace_to_json(const std::vector<agents::StageTraceEntry>& trace) {
    json out = json::array();
    for (const agents::StageTraceEntry& entry : trace) {
        out.push_back({
            {"stage", entry.stage},
            {"agent_id", entry.agent_id},
            {"survivors", entry.survivors},
            {"latency_ms", entry.latency_ms},
            {"usage",
             {{"prompt_tokens", entry.usage.prompt_tokens},
              {"completion_tokens", entry.usage.completion_tokens}}},
            {"ok", entry.ok},
        });
    }
    return out;
}

std::string dataset_fingerprint(const corpus::SampleSet& dataset) {
    std::uint64_t h = text::kFnvOffset;
    for (const corpus::Sample& sample : dataset.samples) {
        h = text::fnv1a64(sample.sample_id, h);
        h = text::fnv1a64(sample.query, h);
        h = text::fnv1a64(corpus::to_string(sample.task), h);
        for (const corpus::Candidate& c : sample.candidates) {
            h = text::fnv1a64(std::to_string(c.index), h);
            h = text::fnv1a64(c.text, h);
            if (c.doc_type) {
                h = text::fnv1a64(corpus::to_string(*c.doc_type), h);
            }
        }
        if (sample.gains) {
            for (int gain : *sample.gains) {
                h = text::fnv1a64(std::to_string(gain), h);
            }
        }
    }
    return text::to_hex(h);
}

const TaskConfig& task_config_for(const RunConfig& config, corpus::Task task) {
    const auto& slot =
        task == corpus::Task::DocumentRanking ? config.document : config.chunk;
    if (!slot) {
        throw ConfigError("run config does not cover task '" +
                          std::string(corpus::to_string(task)) + "'");
    }
    return *slot;
}

struct IclResources {
    const exemplars::ExemplarStore* store = nullptr;
    exemplars::EmbeddingProvider* embedder = nullptr;
    exemplars::IclShots shots = exemplars::IclShots::k5;
};

std::optional<IclResources> icl_resources_for(const RunConfig& config,
                                              const RunInputs& inputs, corpus::Task task) {
    const TaskConfig& task_config = task_config_for(config, task);
    if (!task_config.icl) {
        return std::nullopt;
    }
    IclResources resources;
    resources.store = task == corpus::Task::DocumentRanking ? inputs.document_exemplars
                                                            : inputs.chunk_exemplars;
    resources.embedder = task == corpus::Task::DocumentRanking ? inputs.document_embedder
                                                               : inputs.chunk_embedder;
    if (!resources.store || !resources.embedder) {
        throw ConfigError("ICL is configured for task '" +
                          std::string(corpus::to_string(task)) +
                          "' but no exemplar store/embedder was supplied");
    }
    resources.shots = *exemplars::icl_shots_from_int(task_config.icl->k);
    return resources;
}

std::optional<std::string> few_shot_block(const corpus::Sample& sample,
                                          const std::optional<IclResources>& icl) {
    if (!icl) {
        return std::nullopt;
    }
    const auto query_vector = exemplars::to_float32(icl->embedder->embed(sample.query));
    const auto hits =
        icl->store->index.search(query_vector, static_cast<std::size_t>(icl->shots));
    std::vector<exemplars::Exemplar> retrieved;
    for (const exemplars::SearchHit& hit : hits) {
        if (const exemplars::Exemplar* payload = icl->store->find(hit.exemplar_id)) {
            retrieved.push_back(*payload);
        }
    }
    if (retrieved.empty()) {
        return std::nullopt;
    }
    return exemplars::format_few_shot(retrieved, icl->shots);
}

telemetry::CallRecord call_record(const RunConfig& config, const corpus::Sample& sample,
                                  const std::string& model_id,
                                  const provider::Completion& completion) {
    telemetry::CallRecord record;
    record.run_id = config.run_id;
    record.task = sample.task;
    record.sample_id = sample.sample_id;
    record.latency_ms = completion.latency_ms;
    record.usage = completion.usage;
    record.model_id = model_id;
    return record;
}

// Non-agentic scoring: render the P-variant prompt (chunk tasks in batches),
// parse scores, and take the consensus of the merged score vector.
SampleResult run_prompted_sample(const corpus::Sample& sample, const RunConfig& config,
                                 const RunInputs& inputs,
                                 const std::optional<std::string>& examples) {
    const TaskConfig& task_config = task_config_for(config, sample.task);
    const std::string template_id =
        task_config.prompt_id + "." + std::string(corpus::to_string(sample.task));
    const prompts::PromptTemplate& tmpl = inputs.templates.get(template_id);

    SampleResult result;
    result.sample_id = sample.sample_id;

    const std::size_t batch_size = sample.task == corpus::Task::ChunkRanking
                                       ? static_cast<std::size_t>(config.chunk_batch_size)
                                       : sample.candidates.size();

    agents::ScoreMatrix matrix;
    for (const corpus::Candidate& c : sample.candidates) {
        matrix.declared_candidates.insert(c.index);
    }
    for (std::size_t begin = 0; begin < sample.candidates.size(); begin += batch_size) {
        const std::size_t end = std::min(begin + batch_size, sample.candidates.size());
        const std::span<const corpus::Candidate> batch{sample.candidates.data() + begin,
                                                       end - begin};
        std::set<int> expected;
        for (const corpus::Candidate& c : batch) {
            expected.insert(c.index);
        }

        const auto rendered = prompts::render_chat(tmpl, sample.query, batch, examples);
        provider::ChatRequest request;
        request.model_id = task_config.model_id;
        request.system_prompt = rendered.system_prompt;
        request.user_prompt = rendered.user_prompt;
        request.schema_id = tmpl.output_schema_id;

        prompts::ScoreList scores;
        const provider::Completion completion = provider::complete(
            inputs.chat, request, inputs.policy,
            [&scores, &expected, &tmpl](const std::string& text) {
                scores = prompts::parse_scores(text, expected, tmpl.output_schema_id);
            });
        result.calls.push_back(call_record(config, sample, task_config.model_id, completion));

        auto& row = matrix.cells["model"];
        for (const prompts::ScoreEntry& entry : scores.scores) {
            row[entry.chunk_index] = entry.relevance_score;
        }
    }

    const agents::Ranking ranking = agents::consensus(matrix);
    result.ranking = ranking.order;
    result.aggregates = ranking.aggregates;
    return result;
}

SampleResult run_agentic_sample(const corpus::Sample& sample, const RunConfig& config,
                                const RunInputs& inputs,
                                const std::optional<std::string>& examples) {
    const TaskConfig& task_config = task_config_for(config, sample.task);
    const agents::GraphConfig graph = agents::make_graph(*task_config.agentic);

    agents::GraphRunContext ctx{inputs.chat, inputs.templates};
    ctx.policy = inputs.policy;
    ctx.model_id = task_config.model_id;
    ctx.examples = examples;

    const agents::Ranking ranking =
        sample.task == corpus::Task::DocumentRanking
            ? agents::run_document_ranking(sample, graph, ctx)
            : agents::run_chunk_ranking(sample, graph, ctx);

    SampleResult result;
    result.sample_id = sample.sample_id;
    result.ranking = ranking.order;
    result.aggregates = ranking.aggregates;
    result.trace = trace_to_json(ranking.trace);
    for (const agents::StageTraceEntry& entry : ranking.trace) {
        if (!entry.ok) {
            continue;
        }
        telemetry::CallRecord record;
        record.run_id = config.run_id;
        record.task = sample.task;
        record.sample_id = sample.sample_id;
        record.latency_ms = entry.latency_ms;
        record.usage = entry.usage;
        record.model_id = task_config.model_id;
        result.calls.push_back(std::move(record));
    }
    return result;
}

SampleResult run_sample(const corpus::Sample& sample, const RunConfig& config,
                        const RunInputs& inputs) {
    try {
        const TaskConfig& task_config = task_config_for(config, sample.task);
        const auto icl = icl_resources_for(config, inputs, sample.task);
        const auto examples = few_shot_block(sample, icl);
        if (task_config.agentic) {
            return run_agentic_sample(sample, config, inputs, examples);
        }
        return run_prompted_sample(sample, config, inputs, examples);
    } catch (const Error& e) {
        SampleResult result;
        result.sample_id = sample.sample_id;
        result.failed = true;
        result.failure_reason = e.what();
        return result;
    }
}

std::string hash_of(const std::string& content) {
    return text::to_hex(text::fnv1a64(content));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << content;
}

}  // namespace

RunArtifacts run_experiment(const RunConfig& config, const RunInputs& inputs,
                            const std::filesystem::path& out_dir) {
    validate_run_config(config);
    std::filesystem::create_directories(out_dir);

    // Provider seeding comes from the config; the manifest records that only
    // the mock provider is deterministic.
    json identity = {
        {"config", to_json(config)},
        {"dataset_fingerprint", dataset_fingerprint(inputs.dataset)},
        {"provider", inputs.chat.id()},
        {"deterministic", inputs.chat.id() == "mock"},
        {"version", kVersion},
    };
    const std::string manifest_hash = hash_of(identity.dump());

    // Process samples in dataset order, wave-parallel up to the configured
    // bound; results land in their dataset slot regardless of finish order.
    const auto& samples = inputs.dataset.samples;
    std::vector<SampleResult> results(samples.size());
    const auto wave = static_cast<std::size_t>(std::max(1, config.parallelism));
    for (std::size_t begin = 0; begin < samples.size(); begin += wave) {
        const std::size_t end = std::min(begin + wave, samples.size());
        if (wave == 1) {
            for (std::size_t i = begin; i < end; ++i) {
                results[i] = run_sample(samples[i], config, inputs);
            }
            continue;
        }
        std::vector<std::future<SampleResult>> futures;
        futures.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                return run_sample(samples[i], config, inputs);
            }));
        }
        for (std::size_t i = begin; i < end; ++i) {
            results[i] = futures[i - begin].get();
        }
    }

    std::ostringstream rankings;
    rankings << json({{"manifest", manifest_hash}}).dump() << "\n";
    for (const SampleResult& result : results) {
        rankings << json({{"sample_id", result.sample_id},
                          {"ranking", result.ranking},
                          {"scores", result.aggregates},
                          {"failed", result.failed}})
                        .dump()
                 << "\n";
    }
    const std::string rankings_content = rankings.str();

    std::ostringstream telemetry_out;
    telemetry_out << json({{"manifest", manifest_hash}}).dump() << "\n";
    for (const SampleResult& result : results) {
        for (const telemetry::CallRecord& record : result.calls) {
            telemetry_out << telemetry::to_json_line(record) << "\n";
        }
    }
    const std::string telemetry_content = telemetry_out.str();

    // Scores are computed inline when every successful sample carries gains.
    std::string scores_content;
    {
        bool fully_labeled = true;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!results[i].failed && !samples[i].gains) {
                fully_labeled = false;
                break;
            }
        }
        std::ostringstream scores;
        scores << "# manifest " << manifest_hash << "\n";
        scores << "sample_id,ndcg_at_5\n";
        if (fully_labeled) {
            double total = 0.0;
            std::size_t counted = 0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (results[i].failed) {
                    continue;
                }
                const double score =
                    eval::ndcg_at_k(results[i].ranking, *samples[i].gains, 5);
                scores << results[i].sample_id << ',' << score << "\n";
                total += score;
                ++counted;
            }
            if (counted > 0) {
                scores << "aggregate," << (total / static_cast<double>(counted)) << "\n";
            }
        }
        scores_content = scores.str();
    }

    json failures = json::array();
    std::size_t failure_count = 0;
    for (const SampleResult& result : results) {
        if (result.failed) {
            ++failure_count;
            failures.push_back(
                {{"sample_id", result.sample_id}, {"reason", result.failure_reason}});
        }
    }
    json traces = json::object();
    for (const SampleResult& result : results) {
        if (result.trace) {
            traces[result.sample_id] = *result.trace;
        }
    }

    json manifest = {
        {"identity", identity},
        {"identity_hash", manifest_hash},
        {"artifacts",
         {{"rankings", hash_of(rankings_content)},
          {"telemetry", hash_of(telemetry_content)},
          {"scores", hash_of(scores_content)}}},
        {"failures", failures},
        {"traces", traces},
    };

    RunArtifacts artifacts;
    artifacts.dir = out_dir;
    artifacts.manifest_hash = manifest_hash;
    artifacts.failure_count = failure_count;
    write_file(artifacts.rankings_path(), rankings_content);
    write_file(artifacts.telemetry_path(), telemetry_content);
    write_file(artifacts.scores_path(), scores_content);
    write_file(artifacts.manifest_path(), manifest.dump(2) + "\n");
    return artifacts;
}

EvaluationResult evaluate_run(const std::filesystem::path& run_dir,
                              const corpus::SampleSet& labeled) {
    std::ifstream in(run_dir / "rankings.jsonl");
    if (!in) {
        throw IoError("cannot open rankings file in " + run_dir.string());
    }

    std::map<std::string, const corpus::Sample*> by_id;
    for (const corpus::Sample& sample : labeled.samples) {
        by_id[sample.sample_id] = &sample;
    }

    EvaluationResult result;
    std::ostringstream csv;
    csv << "sample_id,ndcg_at_5\n";
    double total = 0.0;
    std::vector<std::string> missing_gains;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        json entry = json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.is_object() || !entry.contains("sample_id")) {
            continue;  // header
        }
        if (entry.value("failed", false)) {
            continue;
        }
        const std::string sample_id = entry["sample_id"].get<std::string>();
        auto it = by_id.find(sample_id);
        if (it == by_id.end()) {
            continue;
        }
        if (!it->second->gains) {
            missing_gains.push_back(sample_id);
            continue;
        }
        const auto ranking = entry["ranking"].get<std::vector<int>>();
        const double score = eval::ndcg_at_k(ranking, *it->second->gains, 5);
        csv << sample_id << ',' << score << "\n";
        total += score;
        ++result.evaluated;
    }

    if (!missing_gains.empty()) {
        std::string joined;
        for (const std::string& id : missing_gains) {
            joined += joined.empty() ? id : ", " + id;
        }
        throw Error("samples missing gains: " + joined);
    }
    if (result.evaluated == 0) {
        throw Error("no ranked samples intersect the labeled dataset");
    }
    result.aggregate_ndcg = total / static_cast<double>(result.evaluated);
    csv << "aggregate," << result.aggregate_ndcg << "\n";
    result.csv = csv.str();
    return result;
}

}  // namespace prism::runner
