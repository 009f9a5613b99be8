#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prism/embedding.hpp"
#include "prism/sample.hpp"

namespace prism::exemplars {

/// A stored (query, ground-truth ranking) pair used as a few-shot example.
struct Exemplar {
    std::string exemplar_id;
    std::string query;
    std::vector<std::string> answer_ranking;  // candidate labels, best first
    corpus::Task task = corpus::Task::DocumentRanking;
    std::optional<std::vector<float>> vector;
};

struct SearchHit {
    std::string exemplar_id;
    double distance = 0.0;  // L2
};

/// Exact flat L2 index. Vectors are stored as float32 (the persisted form);
/// distances accumulate in double. Immutable once built; concurrent searches
/// are safe.
class ExemplarIndex {
public:
    ExemplarIndex() = default;

    int dimension() const { return dimension_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const float> vector_at(std::size_t i) const;

    /// Inserting sets the index dimension from the first vector. Duplicate
    /// ids and dimension mismatches raise Error.
    void insert(std::string exemplar_id, std::vector<float> vector);

    /// Top-k nearest neighbours by L2 distance, ascending; exact ties keep
    /// insertion order. Returns min(k, size()) hits.
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;

    /// Binary persistence: magic "PRIX", version, dimension, count, packed
    /// little-endian float32 vectors, then a length-prefixed UTF-8 id table.
    /// save/load round-trips are bit-exact.
    void save(const std::filesystem::path& path) const;
    static ExemplarIndex load(const std::filesystem::path& path);

private:
    int dimension_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> storage_;  // row-major, size() * dimension_
};

/// Narrows an embedding to the float32 precision vectors carry inside an
/// index (and in the persisted form).
std::vector<float> to_float32(std::span<const double> vector);

ExemplarIndex build_index(std::span<const Exemplar> exemplars, EmbeddingProvider& provider);

/// An index together with the exemplar payloads it was built from.
struct ExemplarStore {
    ExemplarIndex index;
    std::vector<Exemplar> payloads;

    const Exemplar* find(const std::string& exemplar_id) const;
};

ExemplarStore build_store(std::vector<Exemplar> exemplars, EmbeddingProvider& provider);

/// In-context shot counts used by retrieval-augmented runs.
enum class IclShots { k5 = 5, k10 = 10, k15 = 15 };

std::optional<IclShots> icl_shots_from_int(int k);

/// Formats retrieved exemplars as a numbered few-shot block (at most the
/// configured number of shots, in retrieval order). Deterministic layout; the
/// block carries its own heading so templates can elide it wholesale.
std::string format_few_shot(std::span<const Exemplar> results, IclShots shots);

/// Sidecar persistence of exemplar payloads as JSONL.
void save_exemplars_jsonl(const std::filesystem::path& path, std::span<const Exemplar> exemplars);
std::vector<Exemplar> load_exemplars_jsonl(const std::filesystem::path& path);

/// Derives exemplars from labeled samples: the answer ranking lists candidate
/// labels (doc types, or chunk indices for chunk tasks) sorted by gain
/// descending, ties by candidate index. Samples without gains are skipped.
std::vector<Exemplar> exemplars_from_samples(const corpus::SampleSet& samples);

}  // namespace prism::exemplars
