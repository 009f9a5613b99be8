#pragma once

#include <filesystem>
#include <string>

#include "prism/exemplar.hpp"
#include "prism/run_config.hpp"
#include "prism/telemetry.hpp"

namespace prism::runner {

inline constexpr const char* kVersion = "0.1.0";

struct RunInputs {
    const corpus::SampleSet& dataset;
    provider::ChatProvider& chat;
    const prompts::TemplateRegistry& templates;
    provider::RetryPolicy policy{};
    const exemplars::ExemplarStore* document_exemplars = nullptr;
    const exemplars::ExemplarStore* chunk_exemplars = nullptr;
    exemplars::EmbeddingProvider* document_embedder = nullptr;
    exemplars::EmbeddingProvider* chunk_embedder = nullptr;
};

struct RunArtifacts {
    std::filesystem::path dir;
    std::string manifest_hash;
    std::size_t failure_count = 0;

    std::filesystem::path manifest_path() const { return dir / "manifest.json"; }
    std::filesystem::path rankings_path() const { return dir / "rankings.jsonl"; }
    std::filesystem::path telemetry_path() const { return dir / "telemetry.jsonl"; }
    std::filesystem::path scores_path() const { return dir / "scores.csv"; }
};

/// Executes a run configuration over the dataset and materializes the run
/// directory: manifest.json (resolved config, seed, fingerprints, stage
/// traces, failures), rankings.jsonl, telemetry.jsonl, and scores.csv when
/// the dataset carries gains. Samples are processed concurrently up to
/// config.parallelism but artifacts are assembled in dataset order, so mock
/// runs with a fixed seed are byte-identical across invocations. A failed
/// sample is recorded with a failure marker and the run continues.
RunArtifacts run_experiment(const RunConfig& config, const RunInputs& inputs,
                            const std::filesystem::path& out_dir);

struct EvaluationResult {
    double aggregate_ndcg = 0.0;
    std::size_t evaluated = 0;
    std::string csv;  // per-sample rows plus a trailing aggregate row
};

/// Scores a finished run's rankings against a labeled dataset with NDCG@5.
/// Every successfully ranked sample must carry gains; missing labels raise an
/// Error listing the sample ids.
EvaluationResult evaluate_run(const std::filesystem::path& run_dir,
                              const corpus::SampleSet& labeled);

}  // namespace prism::runner
