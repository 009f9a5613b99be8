#include "prism/exemplar.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "prism/errors.hpp"

namespace prism::exemplars {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'R', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t value) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    }
    out.write(bytes, 4);
}

void write_u64(std::ostream& out, std::uint64_t value) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    }
    out.write(bytes, 8);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    std::uint32_t value = 0;
    for (int i = 3; i >= 0; --i) {
        value = (value << 8) | bytes[i];
    }
    return value;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t value = 0;
    for (int i = 7; i >= 0; --i) {
        value = (value << 8) | bytes[i];
    }
    return value;
}

void write_f32(std::ostream& out, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, 4);
    write_u32(out, bits);
}

float read_f32(std::istream& in) {
    const std::uint32_t bits = read_u32(in);
    float value;
    std::memcpy(&value, &bits, 4);
    return value;
}

}  // namespace

std::span<const float> ExemplarIndex::vector_at(std::size_t i) const {
    const auto dim = static_cast<std::size_t>(dimension_);
    return {storage_.data() + i * dim, dim};
}

void ExemplarIndex::insert(std::string exemplar_id, std::vector<float> vector) {
    if (vector.empty()) {
        throw Error("cannot insert empty vector for exemplar '" + exemplar_id + "'");
    }
    if (dimension_ == 0) {
        dimension_ = static_cast<int>(vector.size());
    } else if (static_cast<int>(vector.size()) != dimension_) {
        throw Error("exemplar '" + exemplar_id + "' has dimension " +
                    std::to_string(vector.size()) + ", index expects " +
                    std::to_string(dimension_));
    }
    if (std::find(ids_.begin(), ids_.end(), exemplar_id) != ids_.end()) {
        throw Error("duplicate exemplar id '" + exemplar_id + "'");
    }
    ids_.push_back(std::move(exemplar_id));
    storage_.insert(storage_.end(), vector.begin(), vector.end());
}

std::vector<SearchHit> ExemplarIndex::search(std::span<const float> query, std::size_t k) const {
    if (k < 1) {
        throw ArgumentError("search requires k >= 1");
    }
    if (static_cast<int>(query.size()) != dimension_) {
        throw ArgumentError("query dimension " + std::to_string(query.size()) +
                            " does not match index dimension " + std::to_string(dimension_));
    }

    // Bounded max-heap over (distance, insertion order); the heap top is the
    // current worst candidate.
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;
    const auto dim = static_cast<std::size_t>(dimension_);
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        const float* v = storage_.data() + row * dim;
        double sum = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = static_cast<double>(query[d]) - static_cast<double>(v[d]);
            sum += diff * diff;
        }
        const Entry entry{std::sqrt(sum), row};
        if (heap.size() < k) {
            heap.push(entry);
        } else if (entry < heap.top()) {
            heap.pop();
            heap.push(entry);
        }
    }

    std::vector<Entry> ordered;
    ordered.reserve(heap.size());
    while (!heap.empty()) {
        ordered.push_back(heap.top());
        heap.pop();
    }
    std::sort(ordered.begin(), ordered.end());

    std::vector<SearchHit> hits;
    hits.reserve(ordered.size());
    for (const auto& [distance, row] : ordered) {
        hits.push_back({ids_[row], distance});
    }
    return hits;
}

void ExemplarIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write index file: " + path.string());
    }
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(dimension_));
    write_u64(out, ids_.size());
    for (float value : storage_) {
        write_f32(out, value);
    }
    for (const std::string& id : ids_) {
        write_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    if (!out) {
        throw IoError("failed writing index file: " + path.string());
    }
}

ExemplarIndex ExemplarIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open index file: " + path.string());
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not an exemplar index file: " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw IoError("unsupported index version " + std::to_string(version));
    }
    ExemplarIndex index;
    index.dimension_ = static_cast<int>(read_u32(in));
    const std::uint64_t count = read_u64(in);
    index.storage_.resize(count * static_cast<std::uint64_t>(index.dimension_));
    for (float& value : index.storage_) {
        value = read_f32(in);
    }
    index.ids_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t length = read_u32(in);
        std::string id(length, '\0');
        in.read(id.data(), length);
        index.ids_.push_back(std::move(id));
    }
    if (!in) {
        throw IoError("truncated index file: " + path.string());
    }
    return index;
}

std::vector<float> to_float32(std::span<const double> vector) {
    std::vector<float> out(vector.size());
    for (std::size_t i = 0; i < vector.size(); ++i) {
        out[i] = static_cast<float>(vector[i]);
    }
    return out;
}

ExemplarIndex build_index(std::span<const Exemplar> exemplars, EmbeddingProvider& provider) {
    if (exemplars.empty()) {
        throw ArgumentError("cannot build an index from zero exemplars");
    }
    ExemplarIndex index;
    for (const Exemplar& exemplar : exemplars) {
        auto vector =
            exemplar.vector ? *exemplar.vector : to_float32(provider.embed(exemplar.query));
        index.insert(exemplar.exemplar_id, std::move(vector));
    }
    return index;
}

const Exemplar* ExemplarStore::find(const std::string& exemplar_id) const {
    for (const Exemplar& e : payloads) {
        if (e.exemplar_id == exemplar_id) {
            return &e;
        }
    }
    return nullptr;
}

ExemplarStore build_store(std::vector<Exemplar> exemplars, EmbeddingProvider& provider) {
    ExemplarStore store;
    store.index = build_index(exemplars, provider);
    store.payloads = std::move(exemplars);
    return store;
}

std::optional<IclShots> icl_shots_from_int(int k) {
    switch (k) {
        case 5: return IclShots::k5;
        case 10: return IclShots::k10;
        case 15: return IclShots::k15;
        default: return std::nullopt;
    }
}

std::string format_few_shot(std::span<const Exemplar> results, IclShots shots) {
    if (results.empty()) {
        throw ArgumentError("format_few_shot requires at least one exemplar");
    }
    const auto limit = std::min(results.size(), static_cast<std::size_t>(shots));

    std::ostringstream out;
    out << "Here are " << limit
        << " worked examples of similar questions with their correct rankings:\n";
    for (std::size_t i = 0; i < limit; ++i) {
        const Exemplar& exemplar = results[i];
        out << "\nExample " << (i + 1) << ":\n";
        out << "Question: " << exemplar.query << "\n";
        out << "Correct ranking: ";
        for (std::size_t j = 0; j < exemplar.answer_ranking.size(); ++j) {
            if (j > 0) {
                out << " > ";
            }
            out << exemplar.answer_ranking[j];
        }
        out << "\n";
    }
    std::string block = out.str();
    if (!block.empty() && block.back() == '\n') {
        block.pop_back();
    }
    return block;
}

void save_exemplars_jsonl(const std::filesystem::path& path,
                          std::span<const Exemplar> exemplars) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write exemplar sidecar: " + path.string());
    }
    for (const Exemplar& exemplar : exemplars) {
        json record = {
            {"exemplar_id", exemplar.exemplar_id},
            {"query", exemplar.query},
            {"answer_ranking", exemplar.answer_ranking},
            {"task", std::string(corpus::to_string(exemplar.task))},
        };
        out << record.dump() << "\n";
    }
}

std::vector<Exemplar> load_exemplars_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open exemplar sidecar: " + path.string());
    }
    std::vector<Exemplar> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            throw IoError("exemplar sidecar line " + std::to_string(line_no) +
                          ": invalid JSON");
        }
        Exemplar exemplar;
        exemplar.exemplar_id = record.at("exemplar_id").get<std::string>();
        exemplar.query = record.at("query").get<std::string>();
        exemplar.answer_ranking = record.at("answer_ranking").get<std::vector<std::string>>();
        auto task = corpus::task_from_string(record.at("task").get<std::string>());
        if (!task) {
            throw IoError("exemplar sidecar line " + std::to_string(line_no) +
                          ": unknown task");
        }
        exemplar.task = *task;
        out.push_back(std::move(exemplar));
    }
    return out;
}

std::vector<Exemplar> exemplars_from_samples(const corpus::SampleSet& samples) {
    std::vector<Exemplar> out;
    for (const corpus::Sample& sample : samples.samples) {
        if (!sample.gains || sample.gains->size() != sample.candidates.size()) {
            continue;
        }
        std::vector<std::size_t> order(sample.candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if ((*sample.gains)[a] != (*sample.gains)[b]) {
                return (*sample.gains)[a] > (*sample.gains)[b];
            }
            return sample.candidates[a].index < sample.candidates[b].index;
        });

        Exemplar exemplar;
        exemplar.exemplar_id = sample.sample_id;
        exemplar.query = sample.query;
        exemplar.task = sample.task;
        for (std::size_t i : order) {
            const corpus::Candidate& c = sample.candidates[i];
            exemplar.answer_ranking.push_back(
                c.doc_type ? std::string(corpus::to_string(*c.doc_type))
                           : "chunk " + std::to_string(c.index));
        }
        out.push_back(std::move(exemplar));
    }
    return out;
}

}  // namespace prism::exemplars
