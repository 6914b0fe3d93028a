#pragma once

/// Arithmetic in GF(2^8) with reduction polynomial
/// x^8 + x^4 + x^3 + x^2 + 1 (0x11D), generator alpha = 0x02.

#include <array>
#include <cstdint>

#include "mpfh/errors.hpp"

namespace mpfh::gf256 {

struct Tables {
    std::array<uint8_t, 512> exp{};  // doubled so exp[log a + log b] needs no mod
    std::array<uint8_t, 256> log{};  // log[0] unused

    Tables() {
        uint16_t x = 1;
        for (int i = 0; i < 255; ++i) {
            exp[i] = static_cast<uint8_t>(x);
            log[x] = static_cast<uint8_t>(i);
            x <<= 1;
            if (x & 0x100) x ^= 0x11D;
        }
        for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    }
};

inline const Tables& tables() {
    static const Tables t;
    return t;
}

inline uint8_t add(uint8_t a, uint8_t b) { return a ^ b; }

inline uint8_t mul(uint8_t a, uint8_t b) {
    if (a == 0 || b == 0) return 0;
    const Tables& t = tables();
    return t.exp[t.log[a] + t.log[b]];
}

inline uint8_t inv(uint8_t a) {
    if (a == 0) throw DomainError("gf256: zero has no inverse");
    const Tables& t = tables();
    return t.exp[255 - t.log[a]];
}

inline uint8_t div(uint8_t a, uint8_t b) { return mul(a, inv(b)); }

/// alpha^e for e >= 0.
inline uint8_t pow_alpha(unsigned e) { return tables().exp[e % 255]; }

/// dst[i] ^= coeff * src[i]; the inner loop of encode and decode.
inline void muladd_row(uint8_t* dst, const uint8_t* src, uint8_t coeff, std::size_t len) {
    if (coeff == 0) return;
    const Tables& t = tables();
    const unsigned lc = t.log[coeff];
    for (std::size_t i = 0; i < len; ++i) {
        const uint8_t s = src[i];
        if (s != 0) dst[i] ^= t.exp[lc + t.log[s]];
    }
}

}  // namespace mpfh::gf256
