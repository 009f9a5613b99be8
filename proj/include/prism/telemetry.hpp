#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "prism/provider.hpp"
#include "prism/quantile.hpp"
#include "prism/sample.hpp"

namespace prism::telemetry {

/// One provider call, as persisted to the run's telemetry JSONL.
struct CallRecord {
    std::string run_id;
    corpus::Task task = corpus::Task::DocumentRanking;
    std::string sample_id;
    std::int64_t latency_ms = 0;
    provider::Usage usage;
    std::string model_id;
};

std::string to_json_line(const CallRecord& record);
CallRecord call_record_from_json_line(const std::string& line);

/// Append-only JSONL sink; appends are serialized so concurrent samples can
/// share one sink.
class RecordSink {
public:
    explicit RecordSink(const std::filesystem::path& path);
    void append(const CallRecord& record);

private:
    std::ofstream out_;
    std::mutex mutex_;
};

/// Loads a telemetry JSONL file, skipping non-record header lines.
std::vector<CallRecord> load_records(const std::filesystem::path& path);

/// Five-number latency summary in seconds, quartiles by linear interpolation.
utils::FiveNumber summarize_latency_seconds(std::span<const CallRecord> records);

struct TokenSummary {
    std::int64_t sum_prompt = 0;
    std::int64_t sum_completion = 0;
    double mean_prompt = 0.0;
    double mean_completion = 0.0;
    std::size_t records = 0;
};

TokenSummary summarize_tokens(std::span<const CallRecord> records);

/// USD per 1M tokens, prompt and completion sides priced separately.
struct PricingTable {
    struct Price {
        double prompt_usd_per_million = 0.0;
        double completion_usd_per_million = 0.0;
    };
    std::map<std::string, Price> models;

    static PricingTable load(const std::filesystem::path& path);
    const Price& require(const std::string& model_id) const;
};

/// Unrounded dollar costs; combined is exactly prompt + completion. Rounding
/// to cents is applied only when formatting.
struct CostSummary {
    double prompt_usd = 0.0;
    double completion_usd = 0.0;
    double combined_usd = 0.0;
};

CostSummary compute_cost(const TokenSummary& tokens, const std::string& model_id,
                         const PricingTable& pricing);

double round_cents(double usd);
std::string format_usd(double usd);

/// Feasibility report rows: per run, a document row, a chunk row and a
/// combined row with latency five-numbers, token sums/means and costs.
std::string feasibility_report_csv(std::span<const CallRecord> records,
                                   const PricingTable& pricing);

/// Plot-data CSVs backing the latency box plots and token bar charts.
std::string latency_boxplot_csv(std::span<const CallRecord> records);
std::string token_barchart_csv(std::span<const CallRecord> records);

}  // namespace prism::telemetry
