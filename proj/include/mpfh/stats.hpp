#pragma once

/// Summary statistics for simulation output: batch-means confidence
/// intervals (latency samples from a queue are autocorrelated, so the iid
/// formula would be overconfident), type-7 linear-interpolation quantiles,
/// and Wilson score intervals for empirical probabilities.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "mpfh/errors.hpp"

namespace mpfh::stats {

/// Inverse standard normal CDF (Acklam's rational approximation,
/// |relative error| < 1.15e-9).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must be in (0, 1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// Student-t quantile via a Cornish-Fisher expansion around the normal
/// quantile; adequate for df >= 3 at the confidence levels used here.
inline double student_t_quantile(double p, int df) {
    const double z = normal_quantile(p);
    if (df <= 0) throw DomainError("student_t_quantile: df must be >= 1");
    const double z3 = z * z * z, z5 = z3 * z * z, z7 = z5 * z * z;
    const double g1 = (z3 + z) / 4.0;
    const double g2 = (5.0 * z5 + 16.0 * z3 + 3.0 * z) / 96.0;
    const double g3 = (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / 384.0;
    const double n = df;
    return z + g1 / n + g2 / (n * n) + g3 / (n * n * n);
}

/// Type-7 quantile: linear interpolation between order statistics at rank
/// h = (count - 1) p. `sorted` must be ascending.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw EmptyInputError("quantile: no samples");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must be in [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> samples, double p) {
    std::sort(samples.begin(), samples.end());
    return quantile_sorted(samples, p);
}

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  ///< unbiased sample variance
    std::map<double, double> quantiles;
    double mean_std_error = 0.0;  ///< standard error behind the CI
    double ci_half_width = 0.0;
    double confidence = 0.95;
    bool small_sample = false;  ///< CI fell back to the normal approximation
};

inline constexpr int kBatchCount = 20;
inline constexpr std::size_t kBatchMeansThreshold = 400;

/// Mean, unbiased variance, quantiles, and a confidence interval for the
/// mean. With >= 400 samples the CI uses 20 batch means (t, 19 df); below
/// that a normal-approximation CI is returned with `small_sample` set.
inline SummaryStats summarize(const std::vector<double>& samples, double confidence = 0.95,
                              const std::vector<double>& quantile_probs = {0.5, 0.9, 0.99}) {
    if (samples.empty()) throw EmptyInputError("summarize: no samples");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw DomainError("summarize: confidence must be in (0, 1)");

    SummaryStats s;
    s.count = samples.size();
    s.confidence = confidence;

    double sum = 0.0, comp = 0.0;
    for (const double x : samples) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    s.mean = sum / static_cast<double>(s.count);

    double sq = 0.0;
    for (const double x : samples) sq += (x - s.mean) * (x - s.mean);
    s.variance = s.count > 1 ? sq / static_cast<double>(s.count - 1) : 0.0;

    std::vector<double> sorted(samples);
    std::sort(sorted.begin(), sorted.end());
    for (const double p : quantile_probs) s.quantiles[p] = quantile_sorted(sorted, p);

    const double tail = 0.5 * (1.0 + confidence);
    if (s.count >= kBatchMeansThreshold) {
        const std::size_t batch_size = s.count / kBatchCount;
        std::vector<double> batch_means(kBatchCount);
        for (int b = 0; b < kBatchCount; ++b) {
            double bs = 0.0;
            const std::size_t off = static_cast<std::size_t>(b) * batch_size;
            for (std::size_t i = 0; i < batch_size; ++i) bs += samples[off + i];
            batch_means[b] = bs / static_cast<double>(batch_size);
        }
        double bm = 0.0;
        for (const double m : batch_means) bm += m;
        bm /= kBatchCount;
        double bvar = 0.0;
        for (const double m : batch_means) bvar += (m - bm) * (m - bm);
        bvar /= (kBatchCount - 1);
        s.mean_std_error = std::sqrt(bvar / kBatchCount);
        s.ci_half_width = student_t_quantile(tail, kBatchCount - 1) * s.mean_std_error;
    } else {
        s.small_sample = true;
        s.mean_std_error =
            s.count > 1 ? std::sqrt(s.variance / static_cast<double>(s.count)) : 0.0;
        s.ci_half_width = s.count > 1 ? normal_quantile(tail) * s.mean_std_error : 0.0;
    }
    return s;
}

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for a binomial proportion, clamped to [0, 1].
inline Interval wilson_interval(std::size_t successes, std::size_t trials,
                                double confidence = 0.95) {
    if (trials < 1) throw DomainError("wilson_interval: trials must be >= 1");
    if (successes > trials) throw DomainError("wilson_interval: successes > trials");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw DomainError("wilson_interval: confidence must be in (0, 1)");
    const double z = normal_quantile(0.5 * (1.0 + confidence));
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace mpfh::stats
