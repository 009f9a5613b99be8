#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "prism/errors.hpp"
#include "prism/ndcg.hpp"
#include "prism/stats.hpp"

using namespace prism;
using namespace prism::eval;

namespace {

// Raw private NDCG@5 scores of the four repeated-run configurations.
const std::vector<double> kRun12 = {0.66537, 0.67366, 0.68523, 0.68579, 0.69019};
const std::vector<double> kRun15 = {0.69640, 0.69735, 0.70630, 0.70977};
const std::vector<double> kRun18 = {0.70187, 0.70455, 0.70551, 0.71446};
const std::vector<double> kRun19 = {0.70491, 0.70827, 0.70865, 0.70923, 0.71181,
                                    0.71277, 0.71375, 0.71713, 0.71818};

// Brute-force DCG oracle over the closed formula.
double oracle_ndcg(const std::vector<int>& predicted, const std::vector<int>& gains, int k) {
    auto dcg = [&](const std::vector<int>& order) {
        double sum = 0.0;
        for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(k); ++i) {
            sum += (std::pow(2.0, gains[static_cast<std::size_t>(order[i])]) - 1.0) /
                   std::log2(static_cast<double>(i) + 2.0);
        }
        return sum;
    };
    std::vector<int> ideal(gains.size());
    std::iota(ideal.begin(), ideal.end(), 0);
    std::sort(ideal.begin(), ideal.end(),
              [&](int a, int b) { return gains[a] > gains[b]; });
    const double denominator = dcg(ideal);
    return denominator == 0.0 ? 0.0 : dcg(predicted) / denominator;
}

}  // namespace

TEST_CASE("t_cdf is 0.5 at zero and symmetric") {
    for (double df : {0.5, 1.0, 2.0, 4.0, 8.0, 30.0, 200.0}) {
        CHECK(t_cdf(0.0, df) == doctest::Approx(0.5));
        for (double x : {0.3, 1.0, 2.5, 7.0}) {
            CHECK(t_cdf(x, df) + t_cdf(-x, df) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("t_cdf is monotone nondecreasing") {
    for (double df : {1.0, 3.0, 10.0}) {
        double previous = 0.0;
        for (double x = -8.0; x <= 8.0; x += 0.25) {
            const double value = t_cdf(x, df);
            CHECK(value >= previous);
            previous = value;
        }
    }
}

TEST_CASE("t_quantile known values") {
    // df=1 is the Cauchy distribution: quantile(0.75) = tan(pi/4) = 1.
    CHECK(t_quantile(0.75, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t_quantile(0.975, 8.0) == doctest::Approx(2.306004).epsilon(1e-6));
    CHECK(t_quantile(0.5, 5.0) == doctest::Approx(0.0));
}

TEST_CASE("t_quantile inverts t_cdf within 1e-8") {
    for (double df : {1.0, 2.0, 4.0, 8.0, 25.0}) {
        for (double x : {-3.0, -1.2, -0.1, 0.4, 1.7, 4.2}) {
            const double p = t_cdf(x, df);
            CHECK(t_quantile(p, df) == doctest::Approx(x).epsilon(1e-8));
        }
    }
}

TEST_CASE("t distribution argument errors") {
    CHECK_THROWS_AS(t_cdf(std::nan(""), 3.0), ArgumentError);
    CHECK_THROWS_AS(t_cdf(0.0, -1.0), ArgumentError);
    CHECK_THROWS_AS(t_quantile(0.0, 3.0), ArgumentError);
    CHECK_THROWS_AS(t_quantile(1.0, 3.0), ArgumentError);
}

TEST_CASE("descriptive_stats reproduces the run-12 reference row") {
    const auto summary = descriptive_stats(kRun12);
    CHECK(summary.n == 5);
    CHECK(std::fabs(summary.mean - 0.68005) < 5e-6);
    CHECK(std::fabs(summary.sd - 0.01023) < 5e-6);
    REQUIRE(summary.cv_percent.has_value());
    CHECK(std::fabs(*summary.cv_percent - 1.50489) < 5e-5);
    CHECK(std::fabs(summary.ci_low - 0.66734) < 5e-5);
    CHECK(std::fabs(summary.ci_high - 0.69276) < 5e-5);
}

TEST_CASE("descriptive_stats reproduces the run-19 reference row") {
    const auto summary = descriptive_stats(kRun19);
    CHECK(summary.n == 9);
    CHECK(std::fabs(summary.mean - 0.71163) < 5e-6);
    CHECK(std::fabs(summary.sd - 0.00433) < 5e-6);
    CHECK(std::fabs(summary.ci_low - 0.70830) < 5e-5);
    CHECK(std::fabs(summary.ci_high - 0.71496) < 5e-5);
}

TEST_CASE("descriptive_stats degenerate constant list") {
    const std::vector<double> constant = {0.5, 0.5, 0.5};
    const auto summary = descriptive_stats(constant);
    CHECK(summary.sd == doctest::Approx(0.0));
    REQUIRE(summary.cv_percent.has_value());
    CHECK(*summary.cv_percent == doctest::Approx(0.0));
    CHECK(summary.ci_low == doctest::Approx(0.5));
    CHECK(summary.ci_high == doctest::Approx(0.5));
}

TEST_CASE("descriptive_stats errors") {
    CHECK_THROWS_AS(descriptive_stats(std::vector<double>{0.5}), ArgumentError);
    const std::vector<double> with_nan = {0.5, std::nan("")};
    CHECK_THROWS_AS(descriptive_stats(with_nan), ArgumentError);
}

TEST_CASE("descriptive_stats CV undefined marker at zero mean") {
    const std::vector<double> centred = {-1.0, 1.0};
    const auto summary = descriptive_stats(centred);
    CHECK_FALSE(summary.cv_percent.has_value());
}

TEST_CASE("CI width shrinks with sample size") {
    std::mt19937 rng(2024);
    std::normal_distribution<double> noise(0.7, 0.01);
    std::vector<double> ten, hundred;
    for (int i = 0; i < 10; ++i) ten.push_back(noise(rng));
    for (int i = 0; i < 100; ++i) hundred.push_back(noise(rng));
    const auto small = descriptive_stats(ten);
    const auto large = descriptive_stats(hundred);
    CHECK(large.ci_high - large.ci_low < small.ci_high - small.ci_low);
}

TEST_CASE("welch_t_test reproduces the reference comparisons") {
    const auto vs15 = welch_t_test(kRun12, kRun15);
    CHECK(std::fabs(vs15.t - (-3.96943)) < 1e-3);
    CHECK(std::fabs(vs15.p - 0.00573) < 5e-4);
    CHECK(vs15.significant);

    const auto vs18 = welch_t_test(kRun12, kRun18);
    CHECK(std::fabs(vs18.t - (-4.98117)) < 1e-3);
    CHECK(std::fabs(vs18.p - 0.00218) < 5e-4);
    CHECK(vs18.significant);

    const auto vs19 = welch_t_test(kRun12, kRun19);
    CHECK(std::fabs(vs19.t - (-6.58157)) < 1e-3);
    CHECK(std::fabs(vs19.p - 0.00141) < 5e-4);
    CHECK(vs19.significant);
}

TEST_CASE("welch_t_test identical samples give t=0, p=1") {
    const std::vector<double> same = {0.1, 0.2, 0.3};
    const auto result = welch_t_test(same, same);
    CHECK(result.t == doctest::Approx(0.0));
    CHECK(result.p == doctest::Approx(1.0));
    CHECK_FALSE(result.significant);
}

TEST_CASE("welch_t_test degenerate zero-variance cases") {
    const std::vector<double> flat_a = {0.5, 0.5};
    const std::vector<double> flat_b = {0.7, 0.7};
    const auto equal = welch_t_test(flat_a, flat_a);
    CHECK(equal.t == doctest::Approx(0.0));
    CHECK(equal.p == doctest::Approx(1.0));

    const auto unequal = welch_t_test(flat_a, flat_b);
    CHECK(unequal.p == doctest::Approx(0.0));
    CHECK(std::isinf(unequal.t));
    CHECK(unequal.significant);
}

TEST_CASE("welch_t_test swap symmetry") {
    std::mt19937 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 4 + static_cast<int>(rng() % 6); ++i) a.push_back(noise(rng));
        for (int i = 0; i < 4 + static_cast<int>(rng() % 6); ++i) b.push_back(noise(rng) + 0.2);
        const auto forward = welch_t_test(a, b);
        const auto backward = welch_t_test(b, a);
        CHECK(forward.t == doctest::Approx(-backward.t).epsilon(1e-12));
        CHECK(forward.df == doctest::Approx(backward.df).epsilon(1e-12));
        CHECK(forward.p == doctest::Approx(backward.p).epsilon(1e-12));
    }
}

TEST_CASE("ndcg perfect ranking is 1") {
    const std::vector<int> predicted = {0, 1, 2, 3, 4};
    const std::vector<int> gains = {4, 3, 2, 1, 0};
    CHECK(ndcg_at_k(predicted, gains, 5) == doctest::Approx(1.0));
}

TEST_CASE("ndcg all-zero gains is 0 by convention") {
    const std::vector<int> predicted = {0, 1, 2};
    const std::vector<int> gains = {0, 0, 0};
    CHECK(ndcg_at_k(predicted, gains, 5) == doctest::Approx(0.0));
}

TEST_CASE("ndcg reversed ranking matches the brute-force oracle") {
    const std::vector<int> gains = {4, 3, 2, 1, 0};
    const std::vector<int> reversed = {4, 3, 2, 1, 0};
    const double value = ndcg_at_k(reversed, gains, 5);
    CHECK(value == doctest::Approx(0.512876).epsilon(1e-6));
    CHECK(value == doctest::Approx(oracle_ndcg(reversed, gains, 5)).epsilon(1e-12));
}

TEST_CASE("ndcg identity permutation is the unique maximizer over 120 permutations") {
    const std::vector<int> gains = {4, 3, 2, 1, 0};
    std::vector<int> permutation = {0, 1, 2, 3, 4};
    int maximizers = 0;
    do {
        const double value = ndcg_at_k(permutation, gains, 5);
        CHECK(value <= 1.0 + 1e-12);
        if (value >= 1.0 - 1e-12) {
            ++maximizers;
            CHECK(permutation == std::vector<int>{0, 1, 2, 3, 4});
        }
    } while (std::next_permutation(permutation.begin(), permutation.end()));
    CHECK(maximizers == 1);
}

TEST_CASE("ndcg argument errors") {
    const std::vector<int> gains = {1, 2, 3};
    const std::vector<int> negative_gains = {1, -2, 3};
    const std::vector<int> valid = {0, 1, 2};
    const std::vector<int> duplicated = {0, 0, 2};
    CHECK_THROWS_AS(ndcg_at_k(valid, negative_gains, 5), ArgumentError);
    CHECK_THROWS_AS(ndcg_at_k(duplicated, gains, 5), ArgumentError);
    CHECK_THROWS_AS(ndcg_at_k(valid, gains, 0), ArgumentError);
}

TEST_CASE("ndcg linear gain scheme is a config switch") {
    const std::vector<int> gains = {3, 1, 0};
    const std::vector<int> predicted = {1, 0, 2};
    const double linear = ndcg_at_k(predicted, gains, 3, GainScheme::Linear);
    // (1 + 3/log2(3)) / (3 + 1/log2(3))
    const double expected = (1.0 + 3.0 / std::log2(3.0)) / (3.0 + 1.0 / std::log2(3.0));
    CHECK(linear == doctest::Approx(expected).epsilon(1e-12));
}
