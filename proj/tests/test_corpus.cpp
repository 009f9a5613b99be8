#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "prism/dataset.hpp"
#include "prism/eda.hpp"
#include "prism/errors.hpp"

using namespace prism;
using namespace prism::corpus;

namespace {

std::string doc_record(const std::string& id, const std::string& query,
                       const std::vector<std::string>& types_by_rank) {
    // Candidate i carries type types_by_rank order scrambled: we emit
    // candidates in canonical type order and gains so that types_by_rank[0]
    // has the highest gain.
    std::ostringstream out;
    out << R"({"sample_id":")" << id << R"(","task":"document","query":")" << query
        << R"(","candidates":[)";
    for (std::size_t i = 0; i < kAllDocTypes.size(); ++i) {
        if (i > 0) out << ',';
        out << R"({"index":)" << i << R"(,"doc_type":")" << to_string(kAllDocTypes[i])
            << R"(","text":"descriptor"})";
    }
    out << R"(],"gains":[)";
    for (std::size_t i = 0; i < kAllDocTypes.size(); ++i) {
        const std::string type(to_string(kAllDocTypes[i]));
        const auto pos = std::find(types_by_rank.begin(), types_by_rank.end(), type) -
                         types_by_rank.begin();
        if (i > 0) out << ',';
        out << (types_by_rank.size() - 1 - static_cast<std::size_t>(pos));
    }
    out << "]}";
    return out.str();
}

SampleSet load_from_string(const std::string& content, Task task) {
    std::istringstream in(content);
    return load_dataset(in, task);
}

}  // namespace

TEST_CASE("doc type strings round-trip") {
    for (DocType type : kAllDocTypes) {
        auto parsed = doc_type_from_string(to_string(type));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == type);
    }
    CHECK_FALSE(doc_type_from_string("10K").has_value());
}

TEST_CASE("load_dataset accepts a minimal valid record") {
    const auto set = load_from_string(
        doc_record("s1", "what was annual revenue", {"10-K", "10-Q", "8-K", "DEF 14A", "Earnings"}),
        Task::DocumentRanking);
    REQUIRE(set.samples.size() == 1);
    CHECK(set.samples[0].sample_id == "s1");
    CHECK(set.samples[0].gains == std::vector<int>{1, 4, 3, 2, 0});
}

TEST_CASE("load_dataset rejects a line missing query") {
    const std::string line =
        R"({"sample_id":"s1","task":"document","candidates":[{"index":0,"text":"x"}]})";
    CHECK_THROWS_WITH_AS(load_from_string(line, Task::DocumentRanking),
                         "line 1: missing query", DatasetError);
}

TEST_CASE("load_dataset rejects gain length mismatches per sample") {
    std::ostringstream content;
    content << R"({"sample_id":"bad","task":"chunk","query":"q","candidates":[)"
            << R"({"index":0,"text":"alpha"},{"index":1,"text":"beta"}],"gains":[1]})"
            << "\n"
            << R"({"sample_id":"ok","task":"chunk","query":"q","candidates":[)"
            << R"({"index":0,"text":"alpha"}],"gains":[1]})" << "\n";
    const auto set = load_from_string(content.str(), Task::ChunkRanking);
    CHECK(set.samples.size() == 1);
    REQUIRE(set.rejected.size() == 1);
    CHECK(set.rejected[0].line == 1);
    CHECK(set.rejected[0].sample_id == "bad");
    CHECK(set.rejected[0].reason.find("gains length") != std::string::npos);
}

TEST_CASE("load_dataset preserves order and is idempotent") {
    std::ostringstream content;
    for (int i = 0; i < 20; ++i) {
        content << doc_record("s" + std::to_string(i), "query " + std::to_string(i),
                              {"10-K", "10-Q", "8-K", "DEF 14A", "Earnings"})
                << "\n";
    }
    const auto first = load_from_string(content.str(), Task::DocumentRanking);
    const auto second = load_from_string(content.str(), Task::DocumentRanking);
    CHECK(first == second);
    for (int i = 0; i < 20; ++i) {
        CHECK(first.samples[static_cast<std::size_t>(i)].sample_id ==
              "s" + std::to_string(i));
    }
}

TEST_CASE("rank_distribution tallies a single sample on the diagonal") {
    const auto set = load_from_string(
        doc_record("s1", "q", {"10-K", "10-Q", "8-K", "DEF 14A", "Earnings"}),
        Task::DocumentRanking);
    const auto table = rank_distribution(set);
    CHECK(table.tallied == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::TenK)][0] == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::TenQ)][1] == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::EightK)][2] == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::Def14A)][3] == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::Earnings)][4] == 1);
}

TEST_CASE("rank_distribution of an empty set is all zero") {
    SampleSet empty;
    const auto table = rank_distribution(empty);
    CHECK(table.tallied == 0);
    for (const auto& row : table.counts) {
        for (std::size_t cell : row) {
            CHECK(cell == 0);
        }
    }
}

TEST_CASE("rank_distribution matches a hand tally over ten samples") {
    // Hand-tallied fixture: rank-1 counts per type below.
    const std::vector<std::vector<std::string>> rankings = {
        {"10-K", "10-Q", "8-K", "DEF 14A", "Earnings"},
        {"10-K", "8-K", "10-Q", "Earnings", "DEF 14A"},
        {"10-K", "Earnings", "DEF 14A", "10-Q", "8-K"},
        {"Earnings", "10-K", "10-Q", "8-K", "DEF 14A"},
        {"Earnings", "DEF 14A", "10-K", "10-Q", "8-K"},
        {"10-Q", "10-K", "Earnings", "8-K", "DEF 14A"},
        {"10-Q", "Earnings", "10-K", "DEF 14A", "8-K"},
        {"DEF 14A", "10-K", "8-K", "10-Q", "Earnings"},
        {"8-K", "10-Q", "DEF 14A", "Earnings", "10-K"},
        {"10-K", "DEF 14A", "Earnings", "8-K", "10-Q"},
    };
    std::ostringstream content;
    for (std::size_t i = 0; i < rankings.size(); ++i) {
        content << doc_record("s" + std::to_string(i), "q", rankings[i]) << "\n";
    }
    const auto set = load_from_string(content.str(), Task::DocumentRanking);
    const auto table = rank_distribution(set);
    CHECK(table.tallied == 10);

    // Rank-1 column, tallied by hand from the fixture above.
    CHECK(table.counts[doc_type_ordinal(DocType::TenK)][0] == 4);
    CHECK(table.counts[doc_type_ordinal(DocType::Earnings)][0] == 2);
    CHECK(table.counts[doc_type_ordinal(DocType::TenQ)][0] == 2);
    CHECK(table.counts[doc_type_ordinal(DocType::Def14A)][0] == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::EightK)][0] == 1);
    // Rank-2 column.
    CHECK(table.counts[doc_type_ordinal(DocType::TenK)][1] == 3);
    CHECK(table.counts[doc_type_ordinal(DocType::TenQ)][1] == 2);
    CHECK(table.counts[doc_type_ordinal(DocType::Def14A)][1] == 2);
    CHECK(table.counts[doc_type_ordinal(DocType::EightK)][1] == 1);
    CHECK(table.counts[doc_type_ordinal(DocType::Earnings)][1] == 2);

    // Row and column sums both equal the tallied count.
    for (const auto& row : table.counts) {
        std::size_t row_sum = 0;
        for (std::size_t cell : row) row_sum += cell;
        CHECK(row_sum == table.tallied);
    }
    for (std::size_t rank = 0; rank < 5; ++rank) {
        std::size_t column_sum = 0;
        for (const auto& row : table.counts) column_sum += row[rank];
        CHECK(column_sum == table.tallied);
    }
}

TEST_CASE("rank_distribution skips samples without full ground truth") {
    std::ostringstream content;
    content << doc_record("s1", "q", {"10-K", "10-Q", "8-K", "DEF 14A", "Earnings"}) << "\n";
    // No gains at all:
    content << R"({"sample_id":"s2","task":"document","query":"q","candidates":[)";
    for (std::size_t i = 0; i < kAllDocTypes.size(); ++i) {
        if (i > 0) content << ',';
        content << R"({"index":)" << i << R"(,"doc_type":")" << to_string(kAllDocTypes[i])
                << R"(","text":"d"})";
    }
    content << "]}\n";
    const auto set = load_from_string(content.str(), Task::DocumentRanking);
    const auto table = rank_distribution(set);
    CHECK(table.tallied == 1);
    CHECK(table.skipped == 1);
}

TEST_CASE("keyword_ratios finds planted full-coverage keyword") {
    std::ostringstream content;
    content << doc_record("s1", "dependency concentration analysis", {"DEF 14A", "10-K", "10-Q", "8-K", "Earnings"})
            << "\n"
            << doc_record("s2", "supplier dependency question", {"DEF 14A", "10-K", "10-Q", "8-K", "Earnings"})
            << "\n";
    const auto set = load_from_string(content.str(), Task::DocumentRanking);
    const auto table = keyword_ratios(set, {"the", "question"}, 6);
    const auto& rows = table.at(DocType::Def14A);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows[0].keyword == "dependency");
    CHECK(rows[0].ratio == doctest::Approx(1.0));
    // Stopwords never appear.
    for (const auto& row : rows) {
        CHECK(row.keyword != "question");
    }
}

TEST_CASE("keyword_ratios rejects top_n < 1 and matches a brute-force count") {
    std::mt19937 rng(7);
    const std::vector<std::string> vocabulary = {
        "revenue", "margin",  "guidance", "board",   "merger", "risk",
        "supply",  "quarter", "segment",  "audit",   "cash",   "dividend"};
    std::vector<std::string> queries;
    std::ostringstream content;
    for (int i = 0; i < 20; ++i) {
        std::string query;
        for (int w = 0; w < 5; ++w) {
            query += vocabulary[rng() % vocabulary.size()] + " ";
        }
        queries.push_back(query);
        content << doc_record("s" + std::to_string(i), query,
                              {"10-K", "10-Q", "8-K", "DEF 14A", "Earnings"})
                << "\n";
    }
    const auto set = load_from_string(content.str(), Task::DocumentRanking);
    CHECK_THROWS_AS(keyword_ratios(set, {}, 0), ArgumentError);

    const auto table = keyword_ratios(set, {}, 100);
    const auto& rows = table.at(DocType::TenK);  // every sample ranks 10-K first

    // Independent count: document frequency by direct substring-token scan.
    for (const auto& row : rows) {
        std::size_t expected = 0;
        for (const auto& query : queries) {
            std::istringstream words(query);
            std::string word;
            bool found = false;
            while (words >> word) {
                if (word == row.keyword) {
                    found = true;
                    break;
                }
            }
            if (found) ++expected;
        }
        CHECK(row.count == expected);
        CHECK(row.ratio == doctest::Approx(static_cast<double>(expected) / 20.0));
        CHECK(row.ratio > 0.0);
        CHECK(row.ratio <= 1.0);
    }
    CHECK(table.at(DocType::TenQ).empty());  // no rank-1 samples for other types
}

namespace {

std::string chunk_record(const std::string& id, const std::vector<std::string>& texts,
                         const std::vector<int>& gains) {
    std::ostringstream out;
    out << R"({"sample_id":")" << id << R"(","task":"chunk","query":"q","candidates":[)";
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (i > 0) out << ',';
        out << R"({"index":)" << i << R"(,"text":")" << texts[i] << R"("})";
    }
    out << R"(],"gains":[)";
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (i > 0) out << ',';
        out << gains[i];
    }
    out << "]}";
    return out.str();
}

std::string words(int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        out += "w ";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

}  // namespace

TEST_CASE("length_stats five-number summary on a tiny relevant group") {
    std::ostringstream content;
    content << chunk_record("s1", {words(10), words(20), words(30), words(5)}, {1, 2, 3, 0})
            << "\n";
    const auto set = load_from_string(content.str(), Task::ChunkRanking);
    const auto [relevant, irrelevant] = length_stats(set, LengthUnit::Words);
    CHECK(relevant.count == 3);
    CHECK(relevant.summary.min == doctest::Approx(10));
    CHECK(relevant.summary.median == doctest::Approx(20));
    CHECK(relevant.summary.max == doctest::Approx(30));
    CHECK(irrelevant.count == 1);
    // Degenerate group: all five numbers equal.
    CHECK(irrelevant.summary.min == doctest::Approx(5));
    CHECK(irrelevant.summary.q1 == doctest::Approx(5));
    CHECK(irrelevant.summary.median == doctest::Approx(5));
    CHECK(irrelevant.summary.q3 == doctest::Approx(5));
    CHECK(irrelevant.summary.max == doctest::Approx(5));
}

TEST_CASE("length_stats matches an independent sorted-scan quartile oracle") {
    std::mt19937 rng(99);
    std::lognormal_distribution<double> lengths(3.0, 0.8);
    std::vector<int> relevant_lengths, irrelevant_lengths;
    std::ostringstream content;
    for (int s = 0; s < 50; ++s) {
        std::vector<std::string> texts;
        std::vector<int> gains;
        for (int c = 0; c < 20; ++c) {
            const int n = std::max(1, static_cast<int>(lengths(rng)));
            const int gain = static_cast<int>(rng() % 2);
            (gain > 0 ? relevant_lengths : irrelevant_lengths).push_back(n);
            texts.push_back(words(n));
            gains.push_back(gain);
        }
        content << chunk_record("s" + std::to_string(s), texts, gains) << "\n";
    }
    const auto set = load_from_string(content.str(), Task::ChunkRanking);
    const auto [relevant, irrelevant] = length_stats(set, LengthUnit::Words);

    // Oracle: sort and interpolate at h = (n-1)p directly.
    auto oracle_quartile = [](std::vector<int> values, double p) {
        std::sort(values.begin(), values.end());
        const double h = static_cast<double>(values.size() - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - std::floor(h)) * (values[hi] - values[lo]);
    };
    CHECK(relevant.count == relevant_lengths.size());
    CHECK(relevant.summary.q1 == doctest::Approx(oracle_quartile(relevant_lengths, 0.25)));
    CHECK(relevant.summary.median == doctest::Approx(oracle_quartile(relevant_lengths, 0.5)));
    CHECK(relevant.summary.q3 == doctest::Approx(oracle_quartile(relevant_lengths, 0.75)));
    CHECK(irrelevant.summary.q1 ==
          doctest::Approx(oracle_quartile(irrelevant_lengths, 0.25)));

    // Ordering invariant under random inputs.
    for (const auto* summary : {&relevant, &irrelevant}) {
        CHECK(summary->summary.min <= summary->summary.q1);
        CHECK(summary->summary.q1 <= summary->summary.median);
        CHECK(summary->summary.median <= summary->summary.q3);
        CHECK(summary->summary.q3 <= summary->summary.max);
    }
}

TEST_CASE("length_stats requires both groups non-empty and a tokenizer for token units") {
    std::ostringstream content;
    content << chunk_record("s1", {words(3), words(4)}, {1, 1}) << "\n";
    const auto set = load_from_string(content.str(), Task::ChunkRanking);
    CHECK_THROWS_WITH_AS(length_stats(set, LengthUnit::Words),
                         "no chunks in group 'irrelevant'", ArgumentError);
    CHECK_THROWS_AS(length_stats(set, LengthUnit::Tokens), ArgumentError);
}

TEST_CASE("length_stats ordering invariant holds for random samples") {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::string> texts;
        std::vector<int> gains;
        const int n = 2 + static_cast<int>(rng() % 30);
        bool has_relevant = false, has_irrelevant = false;
        for (int c = 0; c < n; ++c) {
            texts.push_back(words(1 + static_cast<int>(rng() % 200)));
            const int gain = static_cast<int>(rng() % 3);
            gains.push_back(gain);
            (gain > 0 ? has_relevant : has_irrelevant) = true;
        }
        if (!has_relevant || !has_irrelevant) {
            continue;
        }
        const auto set =
            load_from_string(chunk_record("s", texts, gains) + "\n", Task::ChunkRanking);
        const auto [relevant, irrelevant] = length_stats(set, LengthUnit::Words);
        for (const auto* summary : {&relevant, &irrelevant}) {
            CHECK(summary->summary.min <= summary->summary.q1);
            CHECK(summary->summary.q1 <= summary->summary.median);
            CHECK(summary->summary.median <= summary->summary.q3);
            CHECK(summary->summary.q3 <= summary->summary.max);
        }
    }
}

TEST_CASE("csv emitters produce header rows") {
    SampleSet empty;
    const auto table = rank_distribution(empty);
    const std::string csv = rank_distribution_csv(table);
    CHECK(csv.rfind("doc_type,rank1,rank2,rank3,rank4,rank5\n", 0) == 0);
    CHECK(csv.find("DEF 14A,0,0,0,0,0\n") != std::string::npos);
}
