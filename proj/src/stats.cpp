#include "prism/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "prism/errors.hpp"
#include "prism/log.hpp"

namespace prism::eval {

namespace {

constexpr double kBetaEps = 1e-12;
constexpr int kMaxIterations = 500;
constexpr double kTiny = 1e-300;

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;

    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double numerator = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + numerator * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + numerator / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + numerator * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + numerator / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kBetaEps) {
            return h;
        }
    }
    return h;  // converged in practice long before kMaxIterations
}

double student_t_pdf(double x, double df) {
    const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                            0.5 * std::log(df * M_PI);
    return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ArgumentError(std::string(what) + " contains a non-finite value");
        }
    }
}

struct Moments {
    double mean;
    double var;  // n-1 denominator
};

Moments moments(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    return {mean, ss / static_cast<double>(values.size() - 1)};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw ArgumentError("incomplete beta requires positive shape parameters");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ArgumentError("incomplete beta requires x in [0,1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_cdf(double x, double df) {
    if (!std::isfinite(x)) {
        throw ArgumentError("t_cdf requires a finite x");
    }
    if (!std::isfinite(df) || df <= 0.0) {
        throw ArgumentError("t_cdf requires df > 0");
    }
    if (x == 0.0) {
        return 0.5;
    }
    const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + x * x));
    return x > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double df) {
    if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
        throw ArgumentError("t_quantile requires p in (0,1)");
    }
    if (!std::isfinite(df) || df <= 0.0) {
        throw ArgumentError("t_quantile requires df > 0");
    }
    if (p == 0.5) {
        return 0.0;
    }

    // Bracket the root, then bisect until Newton is safe.
    double lo = -1.0;
    double hi = 1.0;
    while (t_cdf(lo, df) > p) lo *= 2.0;
    while (t_cdf(hi, df) < p) hi *= 2.0;

    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double cdf = t_cdf(x, df);
        if (cdf > p) {
            hi = x;
        } else {
            lo = x;
        }
        x = 0.5 * (lo + hi);
        if (hi - lo < 1e-12 * std::max(1.0, std::fabs(x))) {
            break;
        }
    }
    for (int i = 0; i < 8; ++i) {
        const double err = t_cdf(x, df) - p;
        const double slope = student_t_pdf(x, df);
        if (slope <= 0.0) {
            break;
        }
        const double step = err / slope;
        x -= step;
        if (std::fabs(step) < 1e-14 * std::max(1.0, std::fabs(x))) {
            break;
        }
    }
    return x;
}

StatsSummary descriptive_stats(std::span<const double> scores, double alpha) {
    if (scores.size() < 2) {
        throw ArgumentError("descriptive_stats requires at least 2 scores");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ArgumentError("alpha must lie in (0,1)");
    }
    require_finite(scores, "scores");

    const auto [mean, var] = moments(scores);
    const double sd = std::sqrt(var);

    StatsSummary summary;
    summary.n = scores.size();
    summary.mean = mean;
    summary.sd = sd;
    summary.alpha = alpha;
    if (mean != 0.0) {
        summary.cv_percent = 100.0 * sd / mean;
    }
    const double tq = t_quantile(1.0 - alpha / 2.0, static_cast<double>(scores.size() - 1));
    const double half = tq * sd / std::sqrt(static_cast<double>(scores.size()));
    summary.ci_low = mean - half;
    summary.ci_high = mean + half;
    return summary;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
    if (a.size() < 2 || b.size() < 2) {
        throw ArgumentError("welch_t_test requires at least 2 scores per sample");
    }
    require_finite(a, "sample a");
    require_finite(b, "sample b");

    const auto [mean_a, var_a] = moments(a);
    const auto [mean_b, var_b] = moments(b);
    const double se_a = var_a / static_cast<double>(a.size());
    const double se_b = var_b / static_cast<double>(b.size());

    WelchResult result;
    result.alpha = alpha;

    if (se_a + se_b == 0.0) {
        result.df = static_cast<double>(a.size() + b.size() - 2);
        if (mean_a == mean_b) {
            result.t = 0.0;
            result.p = 1.0;
            result.significant = false;
        } else {
            log_warn("welch_t_test: zero variance in both samples with unequal means");
            result.t = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
            result.p = 0.0;
            result.significant = true;
        }
        return result;
    }

    result.t = (mean_a - mean_b) / std::sqrt(se_a + se_b);
    result.df = (se_a + se_b) * (se_a + se_b) /
                (se_a * se_a / static_cast<double>(a.size() - 1) +
                 se_b * se_b / static_cast<double>(b.size() - 1));
    result.p = 2.0 * t_cdf(-std::fabs(result.t), result.df);
    result.significant = result.p < alpha;
    return result;
}

}  // namespace prism::eval
