#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prism/dataset.hpp"
#include "prism/eda.hpp"
#include "prism/errors.hpp"
#include "prism/exemplar.hpp"
#include "prism/runner.hpp"
#include "prism/stats.hpp"
#include "prism/telemetry.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path default_asset_dir() {
    if (const char* env = std::getenv("PRISM_ASSETS")) {
        return env;
    }
    return PRISM_ASSET_DIR;
}

prism::corpus::Task parse_task(const std::string& name) {
    auto task = prism::corpus::task_from_string(name);
    if (!task) {
        throw prism::ArgumentError("task must be 'document' or 'chunk'");
    }
    return *task;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw prism::IoError("cannot write " + path.string());
    }
    out << content;
}

std::unique_ptr<prism::exemplars::EmbeddingProvider> make_embedder(const std::string& id) {
    if (id == "mock") {
        return std::make_unique<prism::exemplars::MockEmbeddingProvider>();
    }
    throw prism::ConfigError("embedding provider '" + id + "' is not available offline");
}

int cmd_ingest(const std::string& dataset, const std::string& task_name) {
    const auto set = prism::corpus::load_dataset(dataset, parse_task(task_name));
    std::cout << "lines read: " << set.lines_read << "\n";
    std::cout << "samples loaded: " << set.samples.size() << "\n";
    std::cout << "rejected: " << set.rejected.size() << "\n";
    for (const auto& rejected : set.rejected) {
        std::cout << "  line " << rejected.line << " (" << rejected.sample_id
                  << "): " << rejected.reason << "\n";
    }
    return 0;
}

int cmd_eda(const std::string& mode, const std::string& dataset,
            const std::string& stopword_path, std::size_t top_n, const std::string& out) {
    using namespace prism::corpus;
    if (mode == "rank-table") {
        const auto set = load_dataset(dataset, Task::DocumentRanking);
        const auto table = rank_distribution(set);
        write_text(out, rank_distribution_csv(table));
        std::cout << "tallied " << table.tallied << " samples (skipped " << table.skipped
                  << ") -> " << out << "\n";
    } else if (mode == "keywords") {
        const auto set = load_dataset(dataset, Task::DocumentRanking);
        const auto stopwords = stopword_path.empty()
                                   ? std::set<std::string>{}
                                   : load_stopwords(stopword_path);
        write_text(out, keyword_table_csv(keyword_ratios(set, stopwords, top_n)));
        std::cout << "keyword table -> " << out << "\n";
    } else if (mode == "lengths") {
        const auto set = load_dataset(dataset, Task::ChunkRanking);
        const auto [relevant, irrelevant] = length_stats(set, LengthUnit::Words);
        write_text(out, length_stats_csv(relevant, irrelevant));
        std::cout << "length summaries -> " << out << "\n";
    } else {
        throw prism::ArgumentError("eda mode must be rank-table, keywords or lengths");
    }
    return 0;
}

int cmd_index_build(const std::string& dataset, const std::string& task_name,
                    const std::string& out_prefix, const std::string& embedder_id) {
    const auto task = parse_task(task_name);
    const auto set = prism::corpus::load_dataset(dataset, task);
    auto exemplars = prism::exemplars::exemplars_from_samples(set);
    if (exemplars.empty()) {
        throw prism::ArgumentError("dataset has no labeled samples to index");
    }
    auto embedder = make_embedder(embedder_id);
    const auto index = prism::exemplars::build_index(exemplars, *embedder);
    index.save(out_prefix + ".bin");
    prism::exemplars::save_exemplars_jsonl(out_prefix + ".jsonl", exemplars);
    std::cout << "indexed " << index.size() << " exemplars (dim " << index.dimension()
              << ") -> " << out_prefix << ".bin/.jsonl\n";
    return 0;
}

prism::exemplars::ExemplarStore load_store(const std::string& prefix) {
    prism::exemplars::ExemplarStore store;
    store.index = prism::exemplars::ExemplarIndex::load(prefix + ".bin");
    store.payloads = prism::exemplars::load_exemplars_jsonl(prefix + ".jsonl");
    return store;
}

int cmd_run(const std::string& config_path, const std::string& dataset_path,
            const std::string& out_dir, const std::string& provider_id,
            const std::string& train_path, const fs::path& assets) {
    const auto config = prism::runner::load_run_config(config_path);
    const auto templates = prism::prompts::TemplateRegistry::load(assets);
    auto chat = prism::provider::make_chat_provider(provider_id, config.seed);

    // The dataset file may mix tasks; load whichever tasks the config covers.
    prism::corpus::SampleSet dataset;
    if (config.document) {
        auto docs = prism::corpus::load_dataset(dataset_path,
                                                prism::corpus::Task::DocumentRanking);
        dataset.samples.insert(dataset.samples.end(), docs.samples.begin(),
                               docs.samples.end());
    }
    if (config.chunk) {
        auto chunks =
            prism::corpus::load_dataset(dataset_path, prism::corpus::Task::ChunkRanking);
        dataset.samples.insert(dataset.samples.end(), chunks.samples.begin(),
                               chunks.samples.end());
    }

    prism::runner::RunInputs inputs{dataset, *chat, templates};

    std::optional<prism::exemplars::ExemplarStore> doc_store;
    std::optional<prism::exemplars::ExemplarStore> chunk_store;
    std::unique_ptr<prism::exemplars::EmbeddingProvider> doc_embedder;
    std::unique_ptr<prism::exemplars::EmbeddingProvider> chunk_embedder;
    auto prepare_icl = [&](const std::optional<prism::runner::TaskConfig>& task_config,
                           prism::corpus::Task task,
                           std::optional<prism::exemplars::ExemplarStore>& store,
                           std::unique_ptr<prism::exemplars::EmbeddingProvider>& embedder) {
        if (!task_config || !task_config->icl) {
            return;
        }
        embedder = make_embedder(task_config->icl->embedding_provider_id);
        if (task_config->icl->index_path) {
            store = load_store(*task_config->icl->index_path);
        } else if (!train_path.empty()) {
            auto train = prism::corpus::load_dataset(train_path, task);
            store = prism::exemplars::build_store(
                prism::exemplars::exemplars_from_samples(train), *embedder);
        } else {
            throw prism::ConfigError(
                "ICL configured but neither icl.index nor --train was given");
        }
    };
    prepare_icl(config.document, prism::corpus::Task::DocumentRanking, doc_store,
                doc_embedder);
    prepare_icl(config.chunk, prism::corpus::Task::ChunkRanking, chunk_store, chunk_embedder);
    inputs.document_exemplars = doc_store ? &*doc_store : nullptr;
    inputs.chunk_exemplars = chunk_store ? &*chunk_store : nullptr;
    inputs.document_embedder = doc_embedder.get();
    inputs.chunk_embedder = chunk_embedder.get();

    const auto artifacts = prism::runner::run_experiment(config, inputs, out_dir);
    std::cout << "run " << config.run_id << " -> " << out_dir << "\n";
    std::cout << "manifest hash: " << artifacts.manifest_hash << "\n";
    std::cout << "failures: " << artifacts.failure_count << "\n";
    return artifacts.failure_count == 0 ? 0
                                        : static_cast<int>(std::min<std::size_t>(
                                              artifacts.failure_count, 125));
}

int cmd_eval(const std::string& run_dir, const std::string& dataset_path,
             const std::string& out) {
    prism::corpus::SampleSet labeled;
    for (auto task : {prism::corpus::Task::DocumentRanking, prism::corpus::Task::ChunkRanking}) {
        auto part = prism::corpus::load_dataset(dataset_path, task);
        labeled.samples.insert(labeled.samples.end(), part.samples.begin(),
                               part.samples.end());
    }
    const auto result = prism::runner::evaluate_run(run_dir, labeled);
    if (!out.empty()) {
        write_text(out, result.csv);
    }
    std::cout << "evaluated " << result.evaluated << " samples\n";
    std::cout << "aggregate NDCG@5: " << result.aggregate_ndcg << "\n";
    return 0;
}

// Reads a (run_id, score) CSV and emits descriptive + Welch tables. The first
// run id in the file is the baseline for the pairwise tests.
int cmd_stats(const std::string& scores_path, const std::string& out_dir) {
    std::ifstream in(scores_path);
    if (!in) {
        throw prism::IoError("cannot open scores file: " + scores_path);
    }
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> runs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("run_id", 0) == 0 || line[0] == '#') {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw prism::ArgumentError("scores CSV rows must be 'run_id,score'");
        }
        const std::string run_id = line.substr(0, comma);
        const double score = std::stod(line.substr(comma + 1));
        if (!runs.contains(run_id)) {
            order.push_back(run_id);
        }
        runs[run_id].push_back(score);
    }
    if (order.empty()) {
        throw prism::ArgumentError("scores CSV holds no rows");
    }

    fs::create_directories(out_dir);
    std::ostringstream descriptive;
    descriptive << "run_id,n,mean,sd,cv_percent,ci_low,ci_high\n";
    for (const std::string& run_id : order) {
        const auto summary = prism::eval::descriptive_stats(runs[run_id]);
        descriptive << run_id << ',' << summary.n << ',' << summary.mean << ','
                    << summary.sd << ',';
        if (summary.cv_percent) {
            descriptive << *summary.cv_percent;
        } else {
            descriptive << "undefined";
        }
        descriptive << ',' << summary.ci_low << ',' << summary.ci_high << "\n";
    }
    write_text(fs::path(out_dir) / "descriptive.csv", descriptive.str());

    std::ostringstream welch;
    welch << "comparison,t,df,p,significant\n";
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto result =
            prism::eval::welch_t_test(runs[order[0]], runs[order[i]]);
        welch << order[0] << " vs " << order[i] << ',' << result.t << ',' << result.df
              << ',' << result.p << ',' << (result.significant ? "yes" : "no") << "\n";
    }
    write_text(fs::path(out_dir) / "welch.csv", welch.str());
    std::cout << "stats tables -> " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& telemetry_path, const std::string& pricing_path,
               const std::string& out_dir) {
    const auto records = prism::telemetry::load_records(telemetry_path);
    if (records.empty()) {
        throw prism::ArgumentError("telemetry file holds no records");
    }
    const auto pricing = prism::telemetry::PricingTable::load(pricing_path);
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "feasibility.csv",
               prism::telemetry::feasibility_report_csv(records, pricing));
    write_text(fs::path(out_dir) / "latency_boxplot.csv",
               prism::telemetry::latency_boxplot_csv(records));
    write_text(fs::path(out_dir) / "token_barchart.csv",
               prism::telemetry::token_barchart_csv(records));
    std::cout << "report tables -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prism: prompt-refined in-context ranking pipelines"};
    app.require_subcommand(1);

    std::string dataset, task = "document", out, config_path, provider = "mock";
    std::string stopword_path, run_dir, scores_path, telemetry_path, train_path;
    std::string pricing_path = (default_asset_dir() / "pricing.json").string();
    std::string assets = default_asset_dir().string();
    std::size_t top_n = 6;
    std::string eda_mode;

    auto* ingest = app.add_subcommand("ingest", "Load a dataset and report counts");
    ingest->add_option("--dataset", dataset, "JSONL dataset path")->required();
    ingest->add_option("--task", task, "document|chunk");

    auto* eda = app.add_subcommand("eda", "Exploratory dataset analyses");
    eda->add_option("mode", eda_mode, "rank-table|keywords|lengths")->required();
    eda->add_option("--dataset", dataset)->required();
    eda->add_option("--stopwords", stopword_path, "stopword file, one word per line");
    eda->add_option("--top-n", top_n, "keywords per doc type");
    eda->add_option("--out", out, "output CSV path")->required();

    auto* index_build = app.add_subcommand("index-build", "Embed exemplars into a flat index");
    index_build->add_option("--dataset", dataset, "training split JSONL")->required();
    index_build->add_option("--task", task, "document|chunk");
    index_build->add_option("--out", out, "output path prefix")->required();
    index_build->add_option("--embedder", provider, "embedding provider id");

    auto* run = app.add_subcommand("run", "Execute a run config over a dataset");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--dataset", dataset)->required();
    run->add_option("--out", out, "run directory")->required();
    run->add_option("--provider", provider, "chat provider id (mock|http)");
    run->add_option("--train", train_path, "training split for ICL stores");
    run->add_option("--assets", assets, "asset directory");

    auto* eval_cmd = app.add_subcommand("eval", "Score a finished run with NDCG@5");
    eval_cmd->add_option("--run", run_dir, "run directory")->required();
    eval_cmd->add_option("--dataset", dataset, "labeled dataset")->required();
    eval_cmd->add_option("--out", out, "per-sample CSV path");

    auto* stats = app.add_subcommand("stats", "Descriptive + Welch tables from run scores");
    stats->add_option("--scores", scores_path, "CSV of run_id,score rows")->required();
    stats->add_option("--out", out, "output directory")->required();

    auto* report = app.add_subcommand("report", "Latency/token/cost feasibility tables");
    report->add_option("--telemetry", telemetry_path, "telemetry JSONL")->required();
    report->add_option("--pricing", pricing_path, "pricing JSON");
    report->add_option("--out", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(dataset, task);
        if (eda->parsed()) return cmd_eda(eda_mode, dataset, stopword_path, top_n, out);
        if (index_build->parsed()) return cmd_index_build(dataset, task, out, provider);
        if (run->parsed()) return cmd_run(config_path, dataset, out, provider, train_path, assets);
        if (eval_cmd->parsed()) return cmd_eval(run_dir, dataset, out);
        if (stats->parsed()) return cmd_stats(scores_path, out);
        if (report->parsed()) return cmd_report(telemetry_path, pricing_path, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
