#include "prism/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "prism/errors.hpp"

namespace prism::corpus {

using nlohmann::json;

std::string_view to_string(Task task) {
    return task == Task::DocumentRanking ? "document" : "chunk";
}

std::optional<Task> task_from_string(std::string_view text) {
    if (text == "document") return Task::DocumentRanking;
    if (text == "chunk") return Task::ChunkRanking;
    return std::nullopt;
}

bool Sample::has_full_ranking() const {
    if (!gains || gains->size() != candidates.size()) {
        return false;
    }
    std::set<int> distinct(gains->begin(), gains->end());
    return distinct.size() == gains->size();
}

std::optional<Candidate> Sample::rank1_candidate() const {
    if (!gains || gains->empty() || gains->size() != candidates.size()) {
        return std::nullopt;
    }
    std::size_t best = 0;
    bool unique = true;
    for (std::size_t i = 1; i < gains->size(); ++i) {
        if ((*gains)[i] > (*gains)[best]) {
            best = i;
            unique = true;
        } else if ((*gains)[i] == (*gains)[best]) {
            unique = false;
        }
    }
    if (!unique) {
        return std::nullopt;
    }
    return candidates[best];
}

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
    throw DatasetError("line " + std::to_string(line) + ": " + what);
}

const json& require_field(const json& record, const char* name, std::size_t line) {
    auto it = record.find(name);
    if (it == record.end()) {
        malformed(line, std::string("missing ") + name);
    }
    return *it;
}

std::string require_string(const json& record, const char* name, std::size_t line) {
    const json& value = require_field(record, name, line);
    if (!value.is_string()) {
        malformed(line, std::string("field '") + name + "' must be a string");
    }
    return value.get<std::string>();
}

// Invariant check after structural parsing; returns a rejection reason or
// empty string when the sample is valid.
std::string validate_sample(const Sample& sample) {
    if (sample.candidates.empty()) {
        return "no candidates";
    }
    std::set<int> indices;
    for (const Candidate& c : sample.candidates) {
        if (c.index < 0) {
            return "negative candidate index";
        }
        if (!indices.insert(c.index).second) {
            return "duplicate candidate index " + std::to_string(c.index);
        }
        if (sample.task == Task::ChunkRanking && c.text.empty()) {
            return "empty chunk text at index " + std::to_string(c.index);
        }
    }
    if (sample.task == Task::DocumentRanking) {
        if (sample.candidates.size() != kAllDocTypes.size()) {
            return "document sample must have exactly 5 candidates";
        }
        std::set<DocType> types;
        for (const Candidate& c : sample.candidates) {
            if (!c.doc_type) {
                return "document candidate missing doc_type";
            }
            types.insert(*c.doc_type);
        }
        if (types.size() != kAllDocTypes.size()) {
            return "document sample must cover each doc type once";
        }
    }
    if (sample.gains) {
        if (sample.gains->size() != sample.candidates.size()) {
            return "gains length " + std::to_string(sample.gains->size()) +
                   " does not match candidate count " +
                   std::to_string(sample.candidates.size());
        }
        for (int g : *sample.gains) {
            if (g < 0) {
                return "negative gain";
            }
        }
    }
    return {};
}

}  // namespace

SampleSet load_dataset(std::istream& in, Task task) {
    SampleSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        set.lines_read++;

        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            malformed(line_no, "invalid JSON record");
        }

        Sample sample;
        sample.sample_id = require_string(record, "sample_id", line_no);
        sample.query = require_string(record, "query", line_no);

        auto record_task = task_from_string(require_string(record, "task", line_no));
        if (!record_task) {
            malformed(line_no, "unknown task");
        }
        sample.task = *record_task;

        const json& candidates = require_field(record, "candidates", line_no);
        if (!candidates.is_array()) {
            malformed(line_no, "field 'candidates' must be an array");
        }
        for (const json& c : candidates) {
            if (!c.is_object()) {
                malformed(line_no, "candidate must be an object");
            }
            Candidate candidate;
            const json& index = require_field(c, "index", line_no);
            if (!index.is_number_integer()) {
                malformed(line_no, "candidate 'index' must be an integer");
            }
            candidate.index = index.get<int>();
            candidate.text = require_string(c, "text", line_no);
            if (auto it = c.find("doc_type"); it != c.end() && !it->is_null()) {
                if (!it->is_string()) {
                    malformed(line_no, "candidate 'doc_type' must be a string");
                }
                auto type = doc_type_from_string(it->get<std::string>());
                if (!type) {
                    malformed(line_no, "unknown doc_type '" + it->get<std::string>() + "'");
                }
                candidate.doc_type = *type;
            }
            sample.candidates.push_back(std::move(candidate));
        }

        if (auto it = record.find("gains"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) {
                malformed(line_no, "field 'gains' must be an array");
            }
            std::vector<int> gains;
            for (const json& g : *it) {
                if (!g.is_number_integer()) {
                    malformed(line_no, "gain values must be integers");
                }
                gains.push_back(g.get<int>());
            }
            sample.gains = std::move(gains);
        }

        if (sample.task != task) {
            set.rejected.push_back({line_no, sample.sample_id, "task mismatch"});
            continue;
        }
        if (std::string reason = validate_sample(sample); !reason.empty()) {
            set.rejected.push_back({line_no, sample.sample_id, std::move(reason)});
            continue;
        }
        set.samples.push_back(std::move(sample));
    }
    return set;
}

SampleSet load_dataset(const std::filesystem::path& path, Task task) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset file: " + path.string());
    }
    return load_dataset(in, task);
}

void save_dataset(const std::filesystem::path& path, const SampleSet& set) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write dataset file: " + path.string());
    }
    for (const Sample& sample : set.samples) {
        json record = {
            {"sample_id", sample.sample_id},
            {"task", std::string(to_string(sample.task))},
            {"query", sample.query},
        };
        json candidates = json::array();
        for (const Candidate& c : sample.candidates) {
            json jc = {{"index", c.index}, {"text", c.text}};
            if (c.doc_type) {
                jc["doc_type"] = std::string(to_string(*c.doc_type));
            }
            candidates.push_back(std::move(jc));
        }
        record["candidates"] = std::move(candidates);
        if (sample.gains) {
            record["gains"] = *sample.gains;
        }
        out << record.dump() << "\n";
    }
}

}  // namespace prism::corpus
