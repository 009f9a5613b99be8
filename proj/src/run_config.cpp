#include "prism/run_config.hpp"

#include <fstream>

#include "prism/errors.hpp"
#include "prism/exemplar.hpp"

namespace prism::runner {

using nlohmann::json;

namespace {

json task_to_json(const TaskConfig& task) {
    json out = {{"prompt", task.prompt_id}, {"model", task.model_id}};
    if (task.icl) {
        json icl = {{"k", task.icl->k},
                    {"embedding_provider", task.icl->embedding_provider_id}};
        if (task.icl->index_path) {
            icl["index"] = *task.icl->index_path;
        }
        out["icl"] = std::move(icl);
    } else {
        out["icl"] = nullptr;
    }
    out["agentic"] =
        task.agentic ? json(std::string(agents::to_string(*task.agentic))) : json(nullptr);
    return out;
}

TaskConfig task_from_json(const json& node) {
    TaskConfig task;
    task.prompt_id = node.value("prompt", "");
    task.model_id = node.value("model", "");
    if (auto it = node.find("icl"); it != node.end() && !it->is_null()) {
        IclConfig icl;
        icl.k = it->at("k").get<int>();
        icl.embedding_provider_id = it->value("embedding_provider", "mock");
        if (auto index = it->find("index"); index != it->end() && !index->is_null()) {
            icl.index_path = index->get<std::string>();
        }
        task.icl = std::move(icl);
    }
    if (auto it = node.find("agentic"); it != node.end() && !it->is_null()) {
        auto architecture = agents::architecture_from_string(it->get<std::string>());
        if (!architecture) {
            throw ConfigError("unknown agentic architecture '" + it->get<std::string>() + "'");
        }
        task.agentic = architecture;
    }
    return task;
}

}  // namespace

RunConfig run_config_from_json(const json& root) {
    if (!root.is_object()) {
        throw ConfigError("run config must be a JSON object");
    }
    RunConfig config;
    config.run_id = root.value("run_id", "");
    config.seed = root.value("seed", 0ull);
    config.parallelism = root.value("parallelism", 1);
    config.chunk_batch_size = root.value("chunk_batch_size", 50);
    if (auto it = root.find("document"); it != root.end() && !it->is_null()) {
        config.document = task_from_json(*it);
    }
    if (auto it = root.find("chunk"); it != root.end() && !it->is_null()) {
        config.chunk = task_from_json(*it);
    }
    validate_run_config(config);
    return config;
}

json to_json(const RunConfig& config) {
    json out = {
        {"run_id", config.run_id},
        {"seed", config.seed},
        {"parallelism", config.parallelism},
        {"chunk_batch_size", config.chunk_batch_size},
        {"document", config.document ? task_to_json(*config.document) : json(nullptr)},
        {"chunk", config.chunk ? task_to_json(*config.chunk) : json(nullptr)},
    };
    return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open run config: " + path.string());
    }
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded()) {
        throw ConfigError("run config is not valid JSON: " + path.string());
    }
    return run_config_from_json(root);
}

void validate_run_config(const RunConfig& config) {
    if (config.run_id.empty()) {
        throw ConfigError("run config needs a run_id");
    }
    if (!config.document && !config.chunk) {
        throw ConfigError("run config must configure at least one task");
    }
    if (config.parallelism < 1) {
        throw ConfigError("parallelism must be >= 1");
    }
    if (config.chunk_batch_size < 1) {
        throw ConfigError("chunk_batch_size must be >= 1");
    }

    auto check_task = [](const TaskConfig& task, bool is_document, const char* label) {
        if (task.prompt_id.empty() && !task.agentic) {
            throw ConfigError(std::string(label) + " task needs a prompt id");
        }
        if (task.model_id.empty()) {
            throw ConfigError(std::string(label) + " task needs a model id");
        }
        if (task.icl && !exemplars::icl_shots_from_int(task.icl->k)) {
            throw ConfigError(std::string(label) + " task: icl.k must be 5, 10 or 15");
        }
        if (task.agentic) {
            const bool doc_graph = *task.agentic == agents::Architecture::DocEnsemble;
            if (is_document && !doc_graph) {
                throw ConfigError("document task supports only the DocEnsemble graph");
            }
            if (!is_document && doc_graph) {
                throw ConfigError("chunk task supports only the A1..A4 graphs");
            }
        }
    };
    if (config.document) {
        check_task(*config.document, true, "document");
    }
    if (config.chunk) {
        check_task(*config.chunk, false, "chunk");
    }
}

}  // namespace prism::runner
