#pragma once

#include <cmath>
#include <string>

#include "mpfh/errors.hpp"

namespace mpfh {

/// One service class's arrival process and frame size.
///
/// Frames arrive as a Poisson process: exponential inter-arrival times with
/// mean 1/arrival_rate. Every frame carries frame_bits bits.
struct TrafficSpec {
    double arrival_rate = 0.0;  ///< frames per second (>= 0; 0 means a silent service)
    double frame_bits   = 0.0;  ///< bits per frame (whole, positive)

    void validate() const {
        if (!(arrival_rate >= 0.0) || !std::isfinite(arrival_rate))
            throw DomainError("arrival_rate must be finite and >= 0");
        if (!(frame_bits > 0.0) || frame_bits != std::floor(frame_bits))
            throw DomainError("frame_bits must be a positive whole number of bits");
    }

    bool operator==(const TrafficSpec&) const = default;
};

/// The transport substrate: a bundle of parallel paths, each an independent
/// single-server queue draining at `capacity` bits per second.
struct PathConfig {
    int    path_count = 1;    ///< number of parallel paths
    double capacity   = 0.0;  ///< bits per second, per path

    void validate() const {
        if (path_count < 1) throw DomainError("path_count must be >= 1");
        if (!(capacity > 0.0) || !std::isfinite(capacity))
            throw DomainError("capacity must be finite and > 0");
    }

    bool operator==(const PathConfig&) const = default;
};

enum class StrategyKind {
    SinglePath,   ///< whole frame on one path, remaining paths idle
    Duplication,  ///< full copy on every path, first delivery wins
    Coded,        ///< (n,k) erasure code, one block per path, any k recover
};

/// Transport strategy selector. `split_factor` (k) is meaningful only for
/// Coded; Duplication behaves identically to Coded with k = 1.
struct StrategyParams {
    StrategyKind kind = StrategyKind::SinglePath;
    int split_factor  = 1;

    static StrategyParams single_path() { return {StrategyKind::SinglePath, 1}; }
    static StrategyParams duplication() { return {StrategyKind::Duplication, 1}; }
    static StrategyParams coded(int k)  { return {StrategyKind::Coded, k}; }

    /// Check against the path bundle the strategy will run on.
    void validate(const PathConfig& paths) const {
        if (kind == StrategyKind::Coded &&
            (split_factor < 1 || split_factor > paths.path_count))
            throw DomainError("split_factor k must satisfy 1 <= k <= path_count");
    }

    bool operator==(const StrategyParams&) const = default;
};

inline std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::SinglePath:  return "sp";
        case StrategyKind::Duplication: return "mpd";
        case StrategyKind::Coded:       return "mpc";
    }
    return "?";
}

/// First two moments of an effective service time distribution.
struct ServiceMoments {
    double mean          = 0.0;  ///< E[S], seconds
    double variance      = 0.0;  ///< V[S], seconds^2
    double second_moment = 0.0;  ///< E[S^2] = V[S] + E[S]^2, seconds^2
};

/// One point of a reliability-latency curve: the probability that a frame is
/// delivered within `deadline` seconds.
struct ReliabilityPoint {
    double deadline            = 0.0;  ///< seconds
    double success_probability = 0.0;  ///< in [0, 1]
};

}  // namespace mpfh
