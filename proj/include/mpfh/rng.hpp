#pragma once

/// Counter-based random number streams for reproducible simulation.
///
/// Each stream is a Philox4x32-10 generator keyed by
/// `seed XOR fnv1a64(label)`, so a stream's output depends only on the run
/// seed, its label, and how many values it has produced -- never on how
/// other streams interleave with it.

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace mpfh::rng {

inline constexpr const char* kStreamDerivation = "philox4x32/fnv1a-xor/v1";

inline uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 1469598103934665603ULL;
    for (const char c : data) {
        h ^= static_cast<uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

namespace detail {

inline void philox_round(std::array<uint32_t, 4>& ctr, const std::array<uint32_t, 2>& key) {
    const uint64_t p0 = 0xD2511F53ULL * ctr[0];
    const uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr,
                                             std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, key);
        key[0] += 0x9E3779B9U;
        key[1] += 0xBB67AE85U;
    }
    return ctr;
}

}  // namespace detail

/// One independent stream. Copyable; a copy continues from the same counter.
class Stream {
public:
    Stream() : Stream(0, "") {}
    Stream(uint64_t seed, std::string_view label) {
        const uint64_t k = seed ^ fnv1a64(label);
        key_ = {static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)};
    }

    uint64_t next_u64() {
        if (cached_) {
            cached_ = false;
            return cache_;
        }
        const std::array<uint32_t, 4> out = detail::philox4x32_10(
            {static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32), 0, 0}, key_);
        ++counter_;
        cache_ = (static_cast<uint64_t>(out[2]) << 32) | out[3];
        cached_ = true;
        return (static_cast<uint64_t>(out[0]) << 32) | out[1];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential variate with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

    bool bernoulli(double p) { return next_double() < p; }

    /// Uniform integer in [0, bound) by rejection-free scaling.
    uint64_t next_below(uint64_t bound) {
        return static_cast<uint64_t>(next_double() * static_cast<double>(bound));
    }

    void fill_bytes(uint8_t* dst, std::size_t len) {
        std::size_t i = 0;
        while (i + 8 <= len) {
            const uint64_t v = next_u64();
            for (int b = 0; b < 8; ++b) dst[i++] = static_cast<uint8_t>(v >> (8 * b));
        }
        if (i < len) {
            const uint64_t v = next_u64();
            for (int b = 0; i < len; ++b) dst[i++] = static_cast<uint8_t>(v >> (8 * b));
        }
    }

    uint64_t draws_made() const { return counter_; }

private:
    std::array<uint32_t, 2> key_{};
    uint64_t counter_ = 0;
    uint64_t cache_ = 0;
    bool cached_ = false;
};

}  // namespace mpfh::rng
