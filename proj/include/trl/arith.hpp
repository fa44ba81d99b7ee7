#pragma once

// Exact integer number theory used throughout the library: gcd and inverses,
// Jacobi symbols, multiplicative functions, primality, Ramanujan sums and
// Dirichlet rational approximation.

#include <cstdint>
#include <vector>

namespace trl {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

/// Nonnegative gcd; gcd(0, 0) = 0.
i64 gcd(i64 a, i64 b) noexcept;

/// Least nonnegative residue of x modulo q (q >= 1).
inline i64 mod(i64 x, i64 q) noexcept {
    i64 r = x % q;
    return r < 0 ? r + q : r;
}

/// (a * b) mod q without overflow, result in [0, q).
inline i64 mulmod(i64 a, i64 b, i64 q) noexcept {
    return static_cast<i64>(mod(static_cast<i64>((static_cast<i128>(mod(a, q)) * mod(b, q)) % q), q));
}

u64 powmod(u64 base, u64 exp, u64 q) noexcept;

/// x* in [0, q) with x x* = 1 (mod q). Throws NotCoprime when gcd(x, q) > 1.
i64 mod_inverse(i64 x, i64 q);

/// Jacobi symbol (a/q) for odd q >= 1. Throws EvenModulus for even q.
int jacobi_symbol(i64 a, i64 q);

struct PrimePower {
    u64 prime;
    int exponent;
    u64 value;  // prime^exponent
};

/// Trial division with a 2,3,5 wheel. Returns prime powers in increasing order.
std::vector<PrimePower> factorize(u64 n);

struct MultiplicativeValues {
    i64 totient;
    i64 divisor_count;
    int moebius;
};

MultiplicativeValues multiplicative_funcs(i64 q);

i64 totient(i64 q);
int moebius(i64 q);

/// Deterministic Miller-Rabin for the full 64-bit range.
bool is_prime(u64 n) noexcept;

/// Primes p with lo <= p <= hi.
std::vector<i64> primes_in(i64 lo, i64 hi);

/// c_q(l) = sum over units a mod q of e(l a / q), via sum_{d | (q,l)} d mu(q/d).
i64 ramanujan_sum(i64 q, i64 l);

/// t = a/q + phi with gcd(a, q) = 1.
struct RationalArc {
    i64 a = 0;
    i64 q = 1;
    double phi = 0.0;
};

/// Dirichlet approximation of t in [0, 1] by a reduced a/q with q <= N and
/// |t - a/q| <= 1/(N q), checked exactly on the binary value of t. The first
/// qualifying continued-fraction convergent with q >= 2 is returned; if none
/// qualifies, a smallest-q search over 2..N catches non-convergent arcs.
/// Only when no q >= 2 arc exists (t near 0 or 1) is 0/1 or 1/1 returned.
RationalArc dirichlet_approx(double t, i64 N);

/// Exact test of |t - a/q| <= 1/(N q) for the binary value of t.
bool arc_within(double t, i64 a, i64 q, i64 N);

}  // namespace trl
