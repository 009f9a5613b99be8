#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace prism::eval {

/// Descriptive statistics over repeated run scores. cv_percent is absent when
/// the mean is zero.
struct StatsSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, n-1 denominator
    std::optional<double> cv_percent;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double alpha = 0.05;
};

/// Two-sample Welch test result. p is two-tailed; df follows the
/// Welch-Satterthwaite approximation.
struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool significant = false;
    double alpha = 0.05;
};

/// Mean, sample SD, CV and the (1-alpha) confidence interval
/// mean +- t_quantile(1-alpha/2, n-1) * sd / sqrt(n). Requires n >= 2 and
/// finite values.
StatsSummary descriptive_stats(std::span<const double> scores, double alpha = 0.05);

/// Welch's two-sample t-test with Welch-Satterthwaite degrees of freedom.
/// Degenerate inputs (both variances zero): equal means give t = 0, p = 1;
/// unequal means give p = 0 with an infinite t and a logged warning.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b,
                         double alpha = 0.05);

/// Student-t CDF, evaluated through the regularized incomplete beta function
/// (continued fraction, 1e-12 convergence).
double t_cdf(double x, double df);

/// Inverse of t_cdf for p in (0,1): bisection-bracketed Newton iteration,
/// accurate to ~1e-10.
double t_quantile(double p, double df);

/// Regularized incomplete beta I_x(a, b). Exposed for verification.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace prism::eval
