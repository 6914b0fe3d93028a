#pragma once

/// Closed-form latency and reliability models for multi-path transport over
/// parallel single-server queues with exponential service.
///
/// The model: frames of B bits arrive as a Poisson stream of rate lambda and
/// are carried over n parallel paths of capacity c bits/s each. Serving a
/// workload of b bits on one path takes an exponential time with mean b/c.
/// Three strategies are covered:
///
///   - single path: the whole frame on one path (an M/M/1 queue),
///   - duplication: a full copy on every path, first arrival wins,
///   - coded(k):    the frame is split and erasure-coded into n blocks of
///                  B/k bits, any k of which reconstruct it.
///
/// Mean latencies for the multi-path strategies treat the system as an
/// M/G/1 queue whose service time is the k-th order statistic of n
/// exponentials; the resulting values are lower bounds that are tight when
/// sibling copies/blocks are cancelled on completion and the load is
/// moderate. Reliability curves assume an isolated frame (no queueing) and
/// expose the residual arrival-rate term of the per-path sojourn
/// distribution as an explicit `effective_arrival_rate` parameter.

#include <algorithm>
#include <cmath>
#include <string>

#include "mpfh/errors.hpp"
#include "mpfh/types.hpp"

namespace mpfh::analytic {

/// Harmonic number H_n = sum_{j=1..n} 1/j, with H_0 = 0.
/// Compensated summation keeps the relative error near machine epsilon up
/// to n = 10^6 and beyond.
inline double harmonic(long n) {
    if (n < 0) throw DomainError("harmonic: n must be >= 0");
    double sum = 0.0, comp = 0.0;
    for (long j = n; j >= 1; --j) {  // ascending term size
        const double term = 1.0 / static_cast<double>(j);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// Second-order harmonic number sum_{j=1..n} 1/j^2, with the empty sum 0.
inline double harmonic2(long n) {
    if (n < 0) throw DomainError("harmonic2: n must be >= 0");
    double sum = 0.0, comp = 0.0;
    for (long j = n; j >= 1; --j) {
        const double term = 1.0 / (static_cast<double>(j) * static_cast<double>(j));
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// Mean sojourn time of the single-path strategy: the M/M/1 value
/// 1/(mu - lambda) with mu = c/B frames per second.
inline double sp_mean_latency(const TrafficSpec& traffic, const PathConfig& paths) {
    const double mu = paths.capacity / traffic.frame_bits;
    if (mu <= traffic.arrival_rate)
        throw InstabilityError("single path unstable: c/B = " + std::to_string(mu) +
                               " <= lambda = " + std::to_string(traffic.arrival_rate));
    return 1.0 / (mu - traffic.arrival_rate);
}

/// Moments of the k-th smallest of n iid exponentials with rate
/// `per_block_rate`:
///
///   E[S] = (H_n - H_{n-k}) / mu
///   V[S] = (H2_n - H2_{n-k}) / mu^2
///
/// With k = 1 these reduce to 1/(n mu) and 1/(n mu)^2 (the minimum).
inline ServiceMoments order_statistic_moments(int n, int k, double per_block_rate) {
    if (k < 1 || k > n) throw DomainError("order_statistic_moments: need 1 <= k <= n");
    if (!(per_block_rate > 0.0)) throw DomainError("order_statistic_moments: rate must be > 0");
    ServiceMoments m;
    m.mean = (harmonic(n) - harmonic(n - k)) / per_block_rate;
    m.variance = (harmonic2(n) - harmonic2(n - k)) / (per_block_rate * per_block_rate);
    m.second_moment = m.variance + m.mean * m.mean;
    return m;
}

/// Pollaczek-Khinchine mean sojourn time of an M/G/1 queue:
///
///   T = E[S] + lambda E[S^2] / (2 (1 - lambda E[S]))
inline double pk_mean_latency(double arrival_rate, const ServiceMoments& moments) {
    if (arrival_rate < 0.0) throw DomainError("pk_mean_latency: arrival_rate must be >= 0");
    const double util = arrival_rate * moments.mean;
    if (util >= 1.0)
        throw InstabilityError("queue unstable: lambda E[S] = " + std::to_string(util));
    return moments.mean + arrival_rate * moments.second_moment / (2.0 * (1.0 - util));
}

namespace detail {

/// Duplication-specific moments, written out with the telescoped harmonic
/// differences: E[min] = 1/(n mu), V[min] = 1/(n mu)^2.
inline ServiceMoments duplication_moments(int n, double per_copy_rate) {
    ServiceMoments m;
    const double nmu = static_cast<double>(n) * per_copy_rate;
    m.mean = 1.0 / nmu;
    m.variance = 1.0 / (nmu * nmu);
    m.second_moment = m.variance + m.mean * m.mean;
    return m;
}

}  // namespace detail

/// Mean frame latency under the given strategy. For duplication and coded
/// transport the value is the M/G/1 lower bound described in the header
/// comment (exact when siblings are cancelled on completion).
inline double mean_latency(const TrafficSpec& traffic, const PathConfig& paths,
                           const StrategyParams& strategy) {
    strategy.validate(paths);
    switch (strategy.kind) {
        case StrategyKind::SinglePath:
            return sp_mean_latency(traffic, paths);
        case StrategyKind::Duplication:
            return pk_mean_latency(
                traffic.arrival_rate,
                detail::duplication_moments(paths.path_count,
                                            paths.capacity / traffic.frame_bits));
        case StrategyKind::Coded: {
            const double block_rate =
                static_cast<double>(strategy.split_factor) * paths.capacity / traffic.frame_bits;
            return pk_mean_latency(
                traffic.arrival_rate,
                order_statistic_moments(paths.path_count, strategy.split_factor, block_rate));
        }
    }
    throw DomainError("mean_latency: unknown strategy");
}

/// Probability that one path delivers a block of `block_bits` bits within
/// deadline t:
///
///   F(t, b) = 1 - exp(-(c/b - lambda) t)
///
/// This is the sojourn-time CDF of an M/M/1 path at arrival rate lambda;
/// with lambda = 0 it is the bare service-time CDF.
inline double path_success_probability(double deadline, double block_bits,
                                       double capacity, double arrival_rate) {
    if (deadline < 0.0) throw DomainError("path_success_probability: deadline must be >= 0");
    if (!(block_bits > 0.0)) throw DomainError("path_success_probability: block_bits must be > 0");
    const double rate = capacity / block_bits - arrival_rate;
    if (rate <= 0.0)
        throw InstabilityError("path unstable: c/B <= lambda (rate " + std::to_string(rate) + ")");
    return -std::expm1(-rate * deadline);
}

namespace detail {

/// One binomial pmf term C(n,r) p^r (1-p)^(n-r). Exact-coefficient product
/// for small n, log-domain via lgamma above n = 50.
inline double binomial_term(int n, int r, double p) {
    if (p <= 0.0) return r == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return r == n ? 1.0 : 0.0;
    if (n <= 50) {
        double coeff = 1.0;  // exact in double for n <= 50
        for (int i = 1; i <= r; ++i)
            coeff = coeff * static_cast<double>(n - r + i) / static_cast<double>(i);
        return coeff * std::pow(p, r) * std::pow(1.0 - p, n - r);
    }
    const double lg = std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0) +
                      r * std::log(p) + (n - r) * std::log1p(-p);
    return std::exp(lg);
}

/// P[X >= k] for X ~ Binomial(n, p), summing whichever tail has fewer terms.
inline double binomial_upper_tail(int n, int k, double p) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    const int upper_terms = n - k + 1;
    if (upper_terms <= k) {
        double sum = 0.0;
        for (int r = n; r >= k; --r) sum += binomial_term(n, r, p);
        return std::min(sum, 1.0);
    }
    double sum = 0.0;
    for (int r = 0; r < k; ++r) sum += binomial_term(n, r, p);
    return std::max(0.0, 1.0 - std::min(sum, 1.0));
}

/// P[X < k], the exact complement of binomial_upper_tail.
inline double binomial_lower_tail(int n, int k, double p) {
    if (k <= 0) return 0.0;
    if (k > n) return 1.0;
    if (k <= n - k + 1) {
        double sum = 0.0;
        for (int r = k - 1; r >= 0; --r) sum += binomial_term(n, r, p);
        return std::min(sum, 1.0);
    }
    double sum = 0.0;
    for (int r = n; r >= k; --r) sum += binomial_term(n, r, p);
    return std::max(0.0, 1.0 - std::min(sum, 1.0));
}

inline double block_bits_for(const TrafficSpec& traffic, const StrategyParams& strategy) {
    return strategy.kind == StrategyKind::Coded
               ? traffic.frame_bits / static_cast<double>(strategy.split_factor)
               : traffic.frame_bits;
}

}  // namespace detail

/// Probability of delivering a frame within deadline t:
///
///   single path:  F(t, B)
///   duplication:  1 - (1 - F(t, B))^n
///   coded(k):     sum_{r=k..n} C(n,r) F(t, B/k)^r (1 - F(t, B/k))^(n-r)
///
/// `effective_arrival_rate` is the lambda fed into F; pass 0 for the pure
/// isolated-frame service-time view.
inline double reliability(double deadline, const TrafficSpec& traffic, const PathConfig& paths,
                          const StrategyParams& strategy, double effective_arrival_rate) {
    strategy.validate(paths);
    const double block_bits = detail::block_bits_for(traffic, strategy);
    const double f = path_success_probability(deadline, block_bits, paths.capacity,
                                              effective_arrival_rate);
    switch (strategy.kind) {
        case StrategyKind::SinglePath:
            return f;
        case StrategyKind::Duplication:
            return -std::expm1(static_cast<double>(paths.path_count) * std::log1p(-f));
        case StrategyKind::Coded:
            return detail::binomial_upper_tail(paths.path_count, strategy.split_factor, f);
    }
    throw DomainError("reliability: unknown strategy");
}

/// 1 - reliability, computed directly on the small tail so values near
/// 1e-9 and below keep full relative precision.
inline double error_probability(double deadline, const TrafficSpec& traffic,
                                const PathConfig& paths, const StrategyParams& strategy,
                                double effective_arrival_rate) {
    strategy.validate(paths);
    const double block_bits = detail::block_bits_for(traffic, strategy);
    const double f = path_success_probability(deadline, block_bits, paths.capacity,
                                              effective_arrival_rate);
    switch (strategy.kind) {
        case StrategyKind::SinglePath:
            return 1.0 - f;
        case StrategyKind::Duplication:
            return std::exp(static_cast<double>(paths.path_count) * std::log1p(-f));
        case StrategyKind::Coded:
            return detail::binomial_lower_tail(paths.path_count, strategy.split_factor, f);
    }
    throw DomainError("error_probability: unknown strategy");
}

/// Smallest deadline t whose error probability does not exceed
/// `target_error`, located by doubling to bracket and bisecting to an
/// absolute tolerance of 1e-9 s. The returned t satisfies
/// error_probability(t) <= target_error when re-evaluated.
inline double latency_at_error(double target_error, const TrafficSpec& traffic,
                               const PathConfig& paths, const StrategyParams& strategy,
                               double effective_arrival_rate) {
    if (!(target_error > 0.0 && target_error < 1.0))
        throw DomainError("latency_at_error: target_error must be in (0, 1)");
    constexpr double kTol = 1e-9;

    const auto err = [&](double t) {
        return error_probability(t, traffic, paths, strategy, effective_arrival_rate);
    };

    const double block_bits = detail::block_bits_for(traffic, strategy);
    const double rate = paths.capacity / block_bits - effective_arrival_rate;
    if (rate <= 0.0)
        throw InstabilityError("latency_at_error: c/B <= effective arrival rate");

    double lo = 0.0;
    double hi = 1.0 / rate;  // one mean block time
    int doublings = 0;
    while (err(hi) > target_error) {
        hi *= 2.0;
        if (++doublings > 200)
            throw NoSolutionError("latency_at_error: error probability never reaches target");
    }
    while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        if (err(mid) <= target_error)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Split factor k in 1..n minimizing the coded-transport mean latency at
/// the given arrival rate. Unstable k are skipped; ties break toward the
/// smaller k; throws InstabilityError when no k is stable.
inline int optimal_split_factor(const TrafficSpec& traffic, const PathConfig& paths,
                                double effective_arrival_rate) {
    int best_k = 0;
    double best_latency = 0.0;
    for (int k = 1; k <= paths.path_count; ++k) {
        const double block_rate =
            static_cast<double>(k) * paths.capacity / traffic.frame_bits;
        const ServiceMoments m =
            order_statistic_moments(paths.path_count, k, block_rate);
        if (effective_arrival_rate * m.mean >= 1.0) continue;
        const double latency = pk_mean_latency(effective_arrival_rate, m);
        if (best_k == 0 || latency < best_latency) {
            best_k = k;
            best_latency = latency;
        }
    }
    if (best_k == 0)
        throw InstabilityError("optimal_split_factor: no stable split factor in 1..n");
    return best_k;
}

}  // namespace mpfh::analytic
