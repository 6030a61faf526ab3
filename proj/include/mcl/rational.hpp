#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace mcl {

// Exact rational scalar used for all coordinates, weights and levels.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Rat rat_pow2(int exponent) {
    // 2^exponent for possibly negative exponent
    Rat q;
    if (exponent >= 0) {
        mpz_ui_pow_ui(q.get_num_mpz_t(), 2u, static_cast<unsigned long>(exponent));
    } else {
        q = 1;
        mpz_ui_pow_ui(q.get_den_mpz_t(), 2u, static_cast<unsigned long>(-exponent));
    }
    q.canonicalize();
    return q;
}

// Parses "p", "-p/q" or "p/q". Returns nullopt on malformed input or zero denominator.
std::optional<Rat> parse_rat(const std::string& text);

// Canonical "p/q" (denominator always present, canonical sign).
std::string rat_str(const Rat& q);

inline double to_double(const Rat& q) { return q.get_d(); }

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a > b ? a : b; }

}  // namespace mcl
