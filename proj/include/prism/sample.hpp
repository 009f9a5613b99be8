#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prism/doc_type.hpp"

namespace prism::corpus {

enum class Task { DocumentRanking, ChunkRanking };

std::string_view to_string(Task task);
std::optional<Task> task_from_string(std::string_view text);

struct Candidate {
    int index = 0;
    std::optional<DocType> doc_type;  // DocumentRanking only
    std::string text;

    bool operator==(const Candidate&) const = default;
};

/// One query with its labeled candidates. `gains` (when present) aligns with
/// `candidates`: gains[i] is the graded relevance of candidates[i].
struct Sample {
    std::string sample_id;
    std::string query;
    Task task = Task::DocumentRanking;
    std::vector<Candidate> candidates;
    std::optional<std::vector<int>> gains;

    bool operator==(const Sample&) const = default;

    bool has_gains() const { return gains.has_value(); }

    /// True when gains are present and pairwise distinct, i.e. they define a
    /// total order over the candidates.
    bool has_full_ranking() const;

    /// Candidate holding the unique maximum gain, if any.
    std::optional<Candidate> rank1_candidate() const;
};

struct RejectedRecord {
    std::size_t line = 0;
    std::string sample_id;
    std::string reason;
};

struct SampleSet {
    std::vector<Sample> samples;
    std::vector<RejectedRecord> rejected;
    std::size_t lines_read = 0;

    std::size_t size() const { return samples.size(); }
    bool operator==(const SampleSet& other) const {
        return samples == other.samples;
    }
};

}  // namespace prism::corpus
