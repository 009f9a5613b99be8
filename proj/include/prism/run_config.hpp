#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "prism/agents.hpp"

namespace prism::runner {

struct IclConfig {
    int k = 5;  // 5 | 10 | 15
    std::string embedding_provider_id = "mock";
    std::optional<std::string> index_path;  // prefix: <path>.bin / <path>.jsonl

    bool operator==(const IclConfig&) const = default;
};

struct TaskConfig {
    std::string prompt_id;  // "P1".."P4"
    std::string model_id;
    std::optional<IclConfig> icl;
    std::optional<agents::Architecture> agentic;

    bool operator==(const TaskConfig&) const = default;
};

/// One experiment configuration: per-task prompt/model/ICL/agentic axes plus
/// the seed and parallelism knobs. Hybrid configurations (agentic document
/// ranking with non-agentic chunk ranking, or the reverse) are valid.
struct RunConfig {
    std::string run_id;
    std::uint64_t seed = 0;
    int parallelism = 1;
    int chunk_batch_size = 50;  // non-agentic chunk prompts per batch
    std::optional<TaskConfig> document;
    std::optional<TaskConfig> chunk;

    bool operator==(const RunConfig&) const = default;
};

RunConfig run_config_from_json(const nlohmann::json& root);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

/// Structural validation: prompt/model present per active task, icl.k in
/// {5,10,15}, DocEnsemble only on the document side, A1..A4 only on the
/// chunk side. Throws ConfigError.
void validate_run_config(const RunConfig& config);

}  // namespace prism::runner
