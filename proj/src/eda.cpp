#include "prism/eda.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "prism/errors.hpp"
#include "prism/text.hpp"

namespace prism::corpus {

RankDistribution rank_distribution(const SampleSet& samples) {
    RankDistribution table;
    for (const Sample& sample : samples.samples) {
        if (sample.task != Task::DocumentRanking || !sample.has_full_ranking()) {
            table.skipped++;
            continue;
        }
        // Rank 1 is the candidate with the highest gain.
        std::vector<std::size_t> order(sample.candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return (*sample.gains)[a] > (*sample.gains)[b];
        });
        bool typed = std::all_of(sample.candidates.begin(), sample.candidates.end(),
                                 [](const Candidate& c) { return c.doc_type.has_value(); });
        if (!typed) {
            table.skipped++;
            continue;
        }
        for (std::size_t rank = 0; rank < order.size() && rank < 5; ++rank) {
            DocType type = *sample.candidates[order[rank]].doc_type;
            table.counts[doc_type_ordinal(type)][rank]++;
        }
        table.tallied++;
    }
    return table;
}

KeywordTable keyword_ratios(const SampleSet& samples,
                            const std::set<std::string>& stopwords,
                            std::size_t top_n) {
    if (top_n < 1) {
        throw ArgumentError("top_n must be >= 1");
    }

    std::map<DocType, std::size_t> group_sizes;
    std::map<DocType, std::map<std::string, std::size_t>> doc_freq;
    for (const Sample& sample : samples.samples) {
        if (sample.task != Task::DocumentRanking) {
            continue;
        }
        auto rank1 = sample.rank1_candidate();
        if (!rank1 || !rank1->doc_type) {
            continue;
        }
        DocType type = *rank1->doc_type;
        group_sizes[type]++;

        std::set<std::string> seen;
        for (auto& token : text::alpha_tokens(sample.query)) {
            if (stopwords.contains(token)) {
                continue;
            }
            seen.insert(std::move(token));
        }
        for (const std::string& token : seen) {
            doc_freq[type][token]++;
        }
    }

    KeywordTable table;
    for (DocType type : kAllDocTypes) {
        std::vector<KeywordRatio> rows;
        auto group_it = group_sizes.find(type);
        if (group_it != group_sizes.end()) {
            const double total = static_cast<double>(group_it->second);
            for (const auto& [token, freq] : doc_freq[type]) {
                rows.push_back({token, static_cast<double>(freq) / total, freq});
            }
            std::sort(rows.begin(), rows.end(), [](const KeywordRatio& a, const KeywordRatio& b) {
                if (a.ratio != b.ratio) return a.ratio > b.ratio;
                if (a.count != b.count) return a.count > b.count;
                return a.keyword < b.keyword;
            });
            if (rows.size() > top_n) {
                rows.resize(top_n);
            }
        }
        table[type] = std::move(rows);
    }
    return table;
}

std::pair<LengthSummary, LengthSummary> length_stats(const SampleSet& samples,
                                                     LengthUnit unit,
                                                     LengthCounter counter) {
    if (unit == LengthUnit::Tokens && !counter) {
        throw ArgumentError("token unit requires an explicit counting function");
    }
    if (!counter) {
        counter = [](const std::string& s) { return text::word_count(s); };
    }

    std::vector<double> relevant;
    std::vector<double> irrelevant;
    for (const Sample& sample : samples.samples) {
        if (sample.task != Task::ChunkRanking || !sample.gains ||
            sample.gains->size() != sample.candidates.size()) {
            continue;
        }
        for (std::size_t i = 0; i < sample.candidates.size(); ++i) {
            const double length = static_cast<double>(counter(sample.candidates[i].text));
            if ((*sample.gains)[i] > 0) {
                relevant.push_back(length);
            } else {
                irrelevant.push_back(length);
            }
        }
    }
    if (relevant.empty()) {
        throw ArgumentError("no chunks in group 'relevant'");
    }
    if (irrelevant.empty()) {
        throw ArgumentError("no chunks in group 'irrelevant'");
    }

    LengthSummary rel{"relevant", relevant.size(), utils::five_number_summary(std::move(relevant))};
    LengthSummary irr{"irrelevant", irrelevant.size(),
                      utils::five_number_summary(std::move(irrelevant))};
    return {std::move(rel), std::move(irr)};
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open stopword file: " + path.string());
    }
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) {
            words.insert(text::lowercase(line));
        }
    }
    return words;
}

std::string rank_distribution_csv(const RankDistribution& table) {
    std::ostringstream out;
    out << "doc_type,rank1,rank2,rank3,rank4,rank5\n";
    for (DocType type : kAllDocTypes) {
        out << to_string(type);
        for (std::size_t rank = 0; rank < 5; ++rank) {
            out << ',' << table.counts[doc_type_ordinal(type)][rank];
        }
        out << '\n';
    }
    return out.str();
}

std::string keyword_table_csv(const KeywordTable& table) {
    std::ostringstream out;
    out << "doc_type,keyword,ratio,count\n";
    for (DocType type : kAllDocTypes) {
        auto it = table.find(type);
        if (it == table.end()) {
            continue;
        }
        for (const KeywordRatio& row : it->second) {
            out << to_string(type) << ',' << row.keyword << ',' << row.ratio << ','
                << row.count << '\n';
        }
    }
    return out.str();
}

std::string length_stats_csv(const LengthSummary& relevant, const LengthSummary& irrelevant) {
    std::ostringstream out;
    out << "group,count,min,q1,median,q3,max\n";
    for (const LengthSummary* s : {&relevant, &irrelevant}) {
        out << s->group << ',' << s->count << ',' << s->summary.min << ',' << s->summary.q1
            << ',' << s->summary.median << ',' << s->summary.q3 << ',' << s->summary.max
            << '\n';
    }
    return out.str();
}

}  // namespace prism::corpus
