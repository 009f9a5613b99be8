#include "prism/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "prism/errors.hpp"

namespace prism::telemetry {

using nlohmann::json;

std::string to_json_line(const CallRecord& record) {
    json line = {
        {"run_id", record.run_id},
        {"task", std::string(corpus::to_string(record.task))},
        {"sample_id", record.sample_id},
        {"latency_ms", record.latency_ms},
        {"prompt_tokens", record.usage.prompt_tokens},
        {"completion_tokens", record.usage.completion_tokens},
        {"model_id", record.model_id},
    };
    return line.dump();
}

CallRecord call_record_from_json_line(const std::string& line) {
    json parsed = json::parse(line);
    CallRecord record;
    record.run_id = parsed.at("run_id").get<std::string>();
    auto task = corpus::task_from_string(parsed.at("task").get<std::string>());
    if (!task) {
        throw IoError("telemetry record has unknown task");
    }
    record.task = *task;
    record.sample_id = parsed.at("sample_id").get<std::string>();
    record.latency_ms = parsed.at("latency_ms").get<std::int64_t>();
    record.usage.prompt_tokens = parsed.at("prompt_tokens").get<std::int64_t>();
    record.usage.completion_tokens = parsed.at("completion_tokens").get<std::int64_t>();
    record.model_id = parsed.at("model_id").get<std::string>();
    return record;
}

RecordSink::RecordSink(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) {
        throw IoError("cannot open telemetry sink: " + path.string());
    }
}

void RecordSink::append(const CallRecord& record) {
    std::lock_guard lock(mutex_);
    out_ << to_json_line(record) << "\n";
    out_.flush();
}

std::vector<CallRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open telemetry file: " + path.string());
    }
    std::vector<CallRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("run_id")) {
            continue;  // header or foreign line
        }
        records.push_back(call_record_from_json_line(line));
    }
    return records;
}

utils::FiveNumber summarize_latency_seconds(std::span<const CallRecord> records) {
    if (records.empty()) {
        throw ArgumentError("summarize_latency_seconds requires records");
    }
    std::vector<double> seconds;
    seconds.reserve(records.size());
    for (const CallRecord& record : records) {
        seconds.push_back(static_cast<double>(record.latency_ms) / 1000.0);
    }
    return utils::five_number_summary(std::move(seconds));
}

TokenSummary summarize_tokens(std::span<const CallRecord> records) {
    if (records.empty()) {
        throw ArgumentError("summarize_tokens requires records");
    }
    TokenSummary summary;
    summary.records = records.size();
    for (const CallRecord& record : records) {
        summary.sum_prompt += record.usage.prompt_tokens;
        summary.sum_completion += record.usage.completion_tokens;
    }
    summary.mean_prompt =
        static_cast<double>(summary.sum_prompt) / static_cast<double>(records.size());
    summary.mean_completion =
        static_cast<double>(summary.sum_completion) / static_cast<double>(records.size());
    return summary;
}

PricingTable PricingTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open pricing file: " + path.string());
    }
    json parsed = json::parse(in, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("models")) {
        throw ConfigError("invalid pricing file: " + path.string());
    }
    PricingTable table;
    for (const auto& [model, entry] : parsed["models"].items()) {
        Price price;
        price.prompt_usd_per_million = entry.at("prompt_usd_per_million").get<double>();
        price.completion_usd_per_million = entry.at("completion_usd_per_million").get<double>();
        if (price.prompt_usd_per_million < 0.0 || price.completion_usd_per_million < 0.0) {
            throw ConfigError("negative price for model '" + model + "'");
        }
        table.models[model] = price;
    }
    return table;
}

const PricingTable::Price& PricingTable::require(const std::string& model_id) const {
    auto it = models.find(model_id);
    if (it == models.end()) {
        throw ConfigError("no pricing entry for model '" + model_id + "'");
    }
    return it->second;
}

CostSummary compute_cost(const TokenSummary& tokens, const std::string& model_id,
                         const PricingTable& pricing) {
    const auto& price = pricing.require(model_id);
    CostSummary cost;
    cost.prompt_usd =
        static_cast<double>(tokens.sum_prompt) * price.prompt_usd_per_million / 1e6;
    cost.completion_usd =
        static_cast<double>(tokens.sum_completion) * price.completion_usd_per_million / 1e6;
    cost.combined_usd = cost.prompt_usd + cost.completion_usd;
    return cost;
}

double round_cents(double usd) { return std::round(usd * 100.0) / 100.0; }

std::string format_usd(double usd) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << round_cents(usd);
    return out.str();
}

namespace {

struct RunGroup {
    std::string run_id;
    std::vector<CallRecord> document;
    std::vector<CallRecord> chunk;
    std::vector<CallRecord> combined;
};

std::vector<RunGroup> group_by_run(std::span<const CallRecord> records) {
    std::vector<RunGroup> groups;
    auto find = [&groups](const std::string& run_id) -> RunGroup& {
        for (RunGroup& group : groups) {
            if (group.run_id == run_id) {
                return group;
            }
        }
        groups.push_back({run_id, {}, {}, {}});
        return groups.back();
    };
    for (const CallRecord& record : records) {
        RunGroup& group = find(record.run_id);
        (record.task == corpus::Task::DocumentRanking ? group.document : group.chunk)
            .push_back(record);
        group.combined.push_back(record);
    }
    return groups;
}

// Per-record cost accumulation, so task rows with mixed models stay correct.
CostSummary cost_of_records(std::span<const CallRecord> records, const PricingTable& pricing) {
    CostSummary total;
    for (const CallRecord& record : records) {
        const auto& price = pricing.require(record.model_id);
        total.prompt_usd +=
            static_cast<double>(record.usage.prompt_tokens) * price.prompt_usd_per_million / 1e6;
        total.completion_usd += static_cast<double>(record.usage.completion_tokens) *
                                price.completion_usd_per_million / 1e6;
    }
    total.combined_usd = total.prompt_usd + total.completion_usd;
    return total;
}

void append_report_row(std::ostringstream& out, const std::string& run_id,
                       const std::string& task_label, std::span<const CallRecord> records,
                       const PricingTable& pricing) {
    if (records.empty()) {
        return;
    }
    const auto latency = summarize_latency_seconds(records);
    const auto tokens = summarize_tokens(records);
    const auto cost = cost_of_records(records, pricing);
    out << run_id << ',' << task_label << ',' << latency.min << ',' << latency.q1 << ','
        << latency.median << ',' << latency.q3 << ',' << latency.max << ','
        << tokens.sum_prompt << ',' << tokens.sum_completion << ',' << tokens.mean_prompt
        << ',' << tokens.mean_completion << ',' << format_usd(cost.prompt_usd) << ','
        << format_usd(cost.completion_usd) << ',' << format_usd(cost.combined_usd) << '\n';
}

}  // namespace

std::string feasibility_report_csv(std::span<const CallRecord> records,
                                   const PricingTable& pricing) {
    std::ostringstream out;
    out << "run_id,task,lat_min_s,lat_q1_s,lat_median_s,lat_q3_s,lat_max_s,"
           "sum_prompt_tokens,sum_completion_tokens,mean_prompt_tokens,"
           "mean_completion_tokens,cost_prompt_usd,cost_completion_usd,cost_combined_usd\n";
    for (const RunGroup& group : group_by_run(records)) {
        append_report_row(out, group.run_id, "document", group.document, pricing);
        append_report_row(out, group.run_id, "chunk", group.chunk, pricing);
        append_report_row(out, group.run_id, "combined", group.combined, pricing);
    }
    return out.str();
}

std::string latency_boxplot_csv(std::span<const CallRecord> records) {
    std::ostringstream out;
    out << "run_id,task,min_s,q1_s,median_s,q3_s,max_s\n";
    for (const RunGroup& group : group_by_run(records)) {
        for (const auto& [label, subset] :
             {std::pair<std::string, std::span<const CallRecord>>{"document", group.document},
              {"chunk", group.chunk}}) {
            if (subset.empty()) {
                continue;
            }
            const auto latency = summarize_latency_seconds(subset);
            out << group.run_id << ',' << label << ',' << latency.min << ',' << latency.q1
                << ',' << latency.median << ',' << latency.q3 << ',' << latency.max << '\n';
        }
    }
    return out.str();
}

std::string token_barchart_csv(std::span<const CallRecord> records) {
    std::ostringstream out;
    out << "run_id,task,mean_prompt_tokens,mean_completion_tokens\n";
    for (const RunGroup& group : group_by_run(records)) {
        for (const auto& [label, subset] :
             {std::pair<std::string, std::span<const CallRecord>>{"document", group.document},
              {"chunk", group.chunk}}) {
            if (subset.empty()) {
                continue;
            }
            const auto tokens = summarize_tokens(subset);
            out << group.run_id << ',' << label << ',' << tokens.mean_prompt << ','
                << tokens.mean_completion << '\n';
        }
    }
    return out.str();
}

}  // namespace prism::telemetry
