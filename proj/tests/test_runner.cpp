#include <doctest.h>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "prism/errors.hpp"
#include "prism/runner.hpp"

using namespace prism;
using namespace prism::runner;
using nlohmann::json;

namespace {

const prompts::TemplateRegistry& registry() {
    static prompts::TemplateRegistry instance =
        prompts::TemplateRegistry::load(PRISM_ASSET_DIR);
    return instance;
}

corpus::SampleSet synthetic_dataset(int documents, int chunks, unsigned seed = 1) {
    corpus::SampleSet set;
    std::mt19937 rng(seed);
    const std::vector<std::string> topics = {"revenue", "guidance",     "board",
                                             "merger",  "compensation", "risk"};
    for (int d = 0; d < documents; ++d) {
        corpus::Sample sample;
        sample.sample_id = "doc" + std::to_string(d);
        sample.query = "question about " + topics[rng() % topics.size()] + " " +
                       std::to_string(rng() % 100);
        sample.task = corpus::Task::DocumentRanking;
        std::vector<int> gains = {4, 3, 2, 1, 0};
        std::shuffle(gains.begin(), gains.end(), rng);
        int index = 0;
        for (corpus::DocType type : corpus::kAllDocTypes) {
            sample.candidates.push_back(
                {index, type, std::string(corpus::to_string(type)) + " filing overview"});
            ++index;
        }
        sample.gains = gains;
        set.samples.push_back(std::move(sample));
    }
    for (int c = 0; c < chunks; ++c) {
        corpus::Sample sample;
        sample.sample_id = "chunk" + std::to_string(c);
        sample.query = "find " + topics[rng() % topics.size()] + " evidence";
        sample.task = corpus::Task::ChunkRanking;
        const int n = 4 + static_cast<int>(rng() % 8);
        std::vector<int> gains;
        for (int i = 0; i < n; ++i) {
            sample.candidates.push_back(
                {i, std::nullopt,
                 "chunk " + std::to_string(i) + " " + topics[rng() % topics.size()]});
            gains.push_back(static_cast<int>(rng() % 4));
        }
        sample.gains = gains;
        set.samples.push_back(std::move(sample));
    }
    return set;
}

RunConfig run19_shape() {
    // Document: P4 with 5-shot retrieval; chunk: P4 without it; non-agentic.
    RunConfig config;
    config.run_id = "run19-shape";
    config.seed = 42;
    config.parallelism = 2;
    config.document = TaskConfig{"P4", "mock", IclConfig{5, "mock", std::nullopt}, std::nullopt};
    config.chunk = TaskConfig{"P4", "mock", std::nullopt, std::nullopt};
    return config;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("run config round-trips through JSON") {
    RunConfig config = run19_shape();
    config.chunk->agentic = agents::Architecture::A3;
    config.chunk->prompt_id = "P1";
    const auto parsed = run_config_from_json(to_json(config));
    CHECK(parsed == config);
}

TEST_CASE("run config validation") {
    RunConfig config;
    CHECK_THROWS_AS(validate_run_config(config), ConfigError);

    config = run19_shape();
    config.document->icl->k = 7;
    CHECK_THROWS_AS(validate_run_config(config), ConfigError);

    config = run19_shape();
    config.document->agentic = agents::Architecture::A1;
    CHECK_THROWS_AS(validate_run_config(config), ConfigError);

    config = run19_shape();
    config.chunk->agentic = agents::Architecture::DocEnsemble;
    CHECK_THROWS_AS(validate_run_config(config), ConfigError);

    config = run19_shape();
    config.parallelism = 0;
    CHECK_THROWS_AS(validate_run_config(config), ConfigError);
}

TEST_CASE("run-19-shaped config over a mock dataset produces artifacts with no failures") {
    const auto dataset = synthetic_dataset(5, 5);
    const auto train = synthetic_dataset(30, 0, 77);

    exemplars::MockEmbeddingProvider embedder;
    auto store = exemplars::build_store(exemplars::exemplars_from_samples(train), embedder);
    provider::MockChatProvider chat(42);

    RunInputs inputs{dataset, chat, registry()};
    inputs.policy.initial_delay = std::chrono::milliseconds(0);
    inputs.document_exemplars = &store;
    inputs.document_embedder = &embedder;

    TempDir dir("prism_runner_run19");
    const auto artifacts = run_experiment(run19_shape(), inputs, dir.path);
    CHECK(artifacts.failure_count == 0);
    CHECK(std::filesystem::exists(artifacts.manifest_path()));
    CHECK(std::filesystem::exists(artifacts.rankings_path()));
    CHECK(std::filesystem::exists(artifacts.telemetry_path()));
    CHECK(std::filesystem::exists(artifacts.scores_path()));

    // One rankings entry per sample, all successful.
    std::ifstream rankings(artifacts.rankings_path());
    std::string line;
    std::getline(rankings, line);  // header
    CHECK(json::parse(line)["manifest"] == artifacts.manifest_hash);
    std::size_t entries = 0;
    while (std::getline(rankings, line)) {
        const auto entry = json::parse(line);
        CHECK_FALSE(entry["failed"].get<bool>());
        CHECK_FALSE(entry["ranking"].empty());
        ++entries;
    }
    CHECK(entries == dataset.samples.size());

    // The manifest echoes a config that parses back to the original.
    const auto manifest = json::parse(slurp(artifacts.manifest_path()));
    const auto echoed = run_config_from_json(manifest["identity"]["config"]);
    CHECK(echoed == run19_shape());
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
    const auto dataset = synthetic_dataset(4, 8, 3);
    const auto train = synthetic_dataset(20, 0, 9);

    std::array<std::string, 2> manifests, rankings, telemetry, scores;
    for (int round = 0; round < 2; ++round) {
        exemplars::MockEmbeddingProvider embedder;
        auto store =
            exemplars::build_store(exemplars::exemplars_from_samples(train), embedder);
        provider::MockChatProvider chat(42);
        RunInputs inputs{dataset, chat, registry()};
        inputs.policy.initial_delay = std::chrono::milliseconds(0);
        inputs.document_exemplars = &store;
        inputs.document_embedder = &embedder;

        TempDir dir("prism_runner_repro_" + std::to_string(round));
        const auto artifacts = run_experiment(run19_shape(), inputs, dir.path);
        manifests[round] = slurp(artifacts.manifest_path());
        rankings[round] = slurp(artifacts.rankings_path());
        telemetry[round] = slurp(artifacts.telemetry_path());
        scores[round] = slurp(artifacts.scores_path());
    }
    CHECK(manifests[0] == manifests[1]);
    CHECK(rankings[0] == rankings[1]);
    CHECK(telemetry[0] == telemetry[1]);
    CHECK(scores[0] == scores[1]);
}

TEST_CASE("run-25-shaped config records filter-then-scorers stage traces") {
    // Agentic A3 on both document and chunk sides; document uses DocEnsemble.
    RunConfig config;
    config.run_id = "run25-shape";
    config.seed = 7;
    config.document =
        TaskConfig{"P1", "mock", std::nullopt, agents::Architecture::DocEnsemble};
    config.chunk = TaskConfig{"P1", "mock", std::nullopt, agents::Architecture::A3};

    const auto dataset = synthetic_dataset(1, 2, 5);
    provider::MockChatProvider chat(7);
    RunInputs inputs{dataset, chat, registry()};
    inputs.policy.initial_delay = std::chrono::milliseconds(0);

    TempDir dir("prism_runner_run25");
    const auto artifacts = run_experiment(config, inputs, dir.path);
    CHECK(artifacts.failure_count == 0);

    const auto manifest = json::parse(slurp(artifacts.manifest_path()));
    const auto& trace = manifest["traces"]["chunk0"];
    REQUIRE(trace.is_array());
    REQUIRE(trace.size() == 4);
    CHECK(trace[0]["agent_id"] == "quick_filter");
    CHECK(trace[0]["stage"] == 0);
    for (int i = 1; i < 4; ++i) {
        CHECK(trace[i]["stage"] == 1);
    }
    // Document ensemble trace: analyzer then five experts.
    const auto& doc_trace = manifest["traces"]["doc0"];
    REQUIRE(doc_trace.size() == 6);
    CHECK(doc_trace[0]["agent_id"] == "analyzer");
}

TEST_CASE("evaluate_run aggregates NDCG@5 and lists missing labels") {
    const auto dataset = synthetic_dataset(3, 3, 21);
    provider::MockChatProvider chat(1);
    RunConfig config;
    config.run_id = "eval-test";
    config.document = TaskConfig{"P4", "mock", std::nullopt, std::nullopt};
    config.chunk = TaskConfig{"P4", "mock", std::nullopt, std::nullopt};
    RunInputs inputs{dataset, chat, registry()};
    inputs.policy.initial_delay = std::chrono::milliseconds(0);

    TempDir dir("prism_runner_eval");
    (void)run_experiment(config, inputs, dir.path);

    const auto result = evaluate_run(dir.path, dataset);
    CHECK(result.evaluated == dataset.samples.size());
    CHECK(result.aggregate_ndcg >= 0.0);
    CHECK(result.aggregate_ndcg <= 1.0);
    CHECK(result.csv.find("aggregate,") != std::string::npos);

    // Stripping gains from one sample turns evaluation into an error that
    // names the sample.
    corpus::SampleSet unlabeled = dataset;
    unlabeled.samples[0].gains.reset();
    try {
        evaluate_run(dir.path, unlabeled);
        FAIL("expected an error for missing gains");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(unlabeled.samples[0].sample_id) !=
              std::string::npos);
    }

    corpus::SampleSet unrelated;
    CHECK_THROWS_AS(evaluate_run(dir.path, unrelated), Error);
}

TEST_CASE("evaluate_run on ideal and reversed rankings") {
    // Hand-written run directory: one ideal sample, one reversed sample.
    TempDir dir("prism_runner_known");
    {
        std::ofstream rankings(dir.path / "rankings.jsonl");
        rankings << R"({"manifest":"x"})" << "\n";
        rankings << R"({"sample_id":"a","ranking":[0,1,2,3,4],"scores":[5,4,3,2,1],"failed":false})"
                 << "\n";
        rankings << R"({"sample_id":"b","ranking":[4,3,2,1,0],"scores":[5,4,3,2,1],"failed":false})"
                 << "\n";
    }
    corpus::SampleSet labeled;
    for (const char* id : {"a", "b"}) {
        corpus::Sample sample;
        sample.sample_id = id;
        sample.query = "q";
        sample.task = corpus::Task::ChunkRanking;
        for (int i = 0; i < 5; ++i) {
            sample.candidates.push_back({i, std::nullopt, "c"});
        }
        sample.gains = std::vector<int>{4, 3, 2, 1, 0};
        labeled.samples.push_back(std::move(sample));
    }
    const auto result = evaluate_run(dir.path, labeled);
    CHECK(result.evaluated == 2);
    CHECK(result.aggregate_ndcg == doctest::Approx((1.0 + 0.512876) / 2.0).epsilon(1e-5));
}

TEST_CASE("failed samples carry a marker and the run continues") {
    // A chunk config without a chunk prompt template match: force failures by
    // pointing at a prompt id that exists only for documents.
    RunConfig config;
    config.run_id = "failures";
    config.document = TaskConfig{"P4", "mock", std::nullopt, std::nullopt};
    config.chunk = TaskConfig{"P4", "mock", std::nullopt, std::nullopt};

    auto dataset = synthetic_dataset(2, 2, 13);
    // Empty query makes rendering fail for that sample only.
    dataset.samples[2].query.clear();

    provider::MockChatProvider chat(3);
    RunInputs inputs{dataset, chat, registry()};
    inputs.policy.initial_delay = std::chrono::milliseconds(0);

    TempDir dir("prism_runner_failures");
    const auto artifacts = run_experiment(config, inputs, dir.path);
    CHECK(artifacts.failure_count == 1);

    std::ifstream rankings(artifacts.rankings_path());
    std::string line;
    std::getline(rankings, line);  // header
    std::size_t entries = 0, failed = 0;
    while (std::getline(rankings, line)) {
        const auto entry = json::parse(line);
        ++entries;
        if (entry["failed"].get<bool>()) {
            ++failed;
            CHECK(entry["ranking"].empty());
        }
    }
    CHECK(entries == dataset.samples.size());
    CHECK(failed == 1);

    const auto manifest = json::parse(slurp(artifacts.manifest_path()));
    REQUIRE(manifest["failures"].size() == 1);
    CHECK(manifest["failures"][0]["sample_id"] == dataset.samples[2].sample_id);
}
