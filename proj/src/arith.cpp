#include "trl/arith.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "trl/error.hpp"

namespace trl {

namespace {

u64 uabs(i64 x) noexcept {
    return x < 0 ? u64(0) - static_cast<u64>(x) : static_cast<u64>(x);
}

u64 mulmod_u(u64 a, u64 b, u64 m) noexcept {
    return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

using boost::multiprecision::cpp_int;

// Exact binary value of a finite double as num / den with den a power of two.
struct ExactDouble {
    cpp_int num;
    cpp_int den;
};

ExactDouble exact_value(double t) {
    int exp = 0;
    const double mant = std::frexp(t, &exp);  // t = mant * 2^exp, 0.5 <= |mant| < 1
    const auto m = static_cast<i64>(std::ldexp(mant, 53));
    int shift = exp - 53;
    ExactDouble r{cpp_int(m), cpp_int(1)};
    if (shift >= 0) {
        r.num <<= shift;
    } else {
        r.den <<= -shift;
    }
    return r;
}

bool within_exact(const ExactDouble& t, i64 a, i64 q, i64 N) {
    // |t - a/q| <= 1/(N q)  <=>  N |num q - a den| <= den
    cpp_int diff = t.num * q - cpp_int(a) * t.den;
    if (diff < 0) diff = -diff;
    return diff * N <= t.den;
}

}  // namespace

i64 gcd(i64 a, i64 b) noexcept {
    return static_cast<i64>(std::gcd(uabs(a), uabs(b)));
}

u64 powmod(u64 base, u64 exp, u64 q) noexcept {
    u64 result = 1 % q;
    base %= q;
    while (exp > 0) {
        if (exp & 1) result = mulmod_u(result, base, q);
        base = mulmod_u(base, base, q);
        exp >>= 1;
    }
    return result;
}

i64 mod_inverse(i64 x, i64 q) {
    require(q >= 1, ErrorCode::InvalidArgument, "mod_inverse: modulus must be positive");
    i128 r0 = q, r1 = mod(x, q);
    i128 s0 = 0, s1 = 1;
    while (r1 != 0) {
        const i128 k = r0 / r1;
        const i128 r2 = r0 - k * r1;
        r0 = r1;
        r1 = r2;
        const i128 s2 = s0 - k * s1;
        s0 = s1;
        s1 = s2;
    }
    if (r0 != 1) {
        if (q == 1) return 0;
        throw Error(ErrorCode::NotCoprime, "mod_inverse: gcd(" + std::to_string(x) + ", " +
                                               std::to_string(q) + ") > 1");
    }
    return mod(static_cast<i64>(s0), q);
}

int jacobi_symbol(i64 a, i64 q) {
    require(q >= 1, ErrorCode::InvalidArgument, "jacobi_symbol: modulus must be positive");
    require(q % 2 == 1, ErrorCode::EvenModulus, "jacobi_symbol: modulus " + std::to_string(q) + " is even");
    u64 n = static_cast<u64>(q);
    u64 x = static_cast<u64>(mod(a, q));
    int result = 1;
    while (x != 0) {
        while ((x & 1) == 0) {
            x >>= 1;
            const u64 r = n & 7;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(x, n);
        if ((x & 3) == 3 && (n & 3) == 3) result = -result;
        x %= n;
    }
    return n == 1 ? result : 0;
}

std::vector<PrimePower> factorize(u64 n) {
    std::vector<PrimePower> out;
    if (n <= 1) return out;
    auto take = [&](u64 p) {
        if (n % p != 0) return;
        PrimePower pp{p, 0, 1};
        while (n % p == 0) {
            n /= p;
            ++pp.exponent;
            pp.value *= p;
        }
        out.push_back(pp);
    };
    take(2);
    take(3);
    take(5);
    // wheel mod 30
    static constexpr std::array<u64, 8> kSteps{4, 2, 4, 2, 4, 6, 2, 6};
    u64 p = 7;
    std::size_t i = 0;
    while (p <= n / p) {
        take(p);
        p += kSteps[i];
        i = (i + 1) & 7;
    }
    if (n > 1) out.push_back({n, 1, n});
    return out;
}

MultiplicativeValues multiplicative_funcs(i64 q) {
    require(q >= 1, ErrorCode::InvalidArgument, "multiplicative_funcs: q must be >= 1");
    MultiplicativeValues v{1, 1, 1};
    for (const auto& pp : factorize(static_cast<u64>(q))) {
        v.totient *= static_cast<i64>(pp.value / pp.prime * (pp.prime - 1));
        v.divisor_count *= pp.exponent + 1;
        v.moebius = pp.exponent > 1 ? 0 : -v.moebius;
    }
    return v;
}

i64 totient(i64 q) { return multiplicative_funcs(q).totient; }

int moebius(i64 q) { return multiplicative_funcs(q).moebius; }

bool is_prime(u64 n) noexcept {
    if (n < 2) return false;
    static constexpr std::array<u64, 12> kBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : kBases) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : kBases) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod_u(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::vector<i64> primes_in(i64 lo, i64 hi) {
    std::vector<i64> out;
    for (i64 p = std::max<i64>(lo, 2); p <= hi; ++p) {
        if (is_prime(static_cast<u64>(p))) out.push_back(p);
    }
    return out;
}

i64 ramanujan_sum(i64 q, i64 l) {
    require(q >= 1, ErrorCode::InvalidArgument, "ramanujan_sum: q must be >= 1");
    const i64 g = l == 0 ? q : gcd(q, l);
    i64 total = 0;
    for (i64 d = 1; d * d <= g; ++d) {
        if (g % d != 0) continue;
        total += d * moebius(q / d);
        const i64 e = g / d;
        if (e != d) total += e * moebius(q / e);
    }
    return total;
}

bool arc_within(double t, i64 a, i64 q, i64 N) {
    return within_exact(exact_value(t), a, q, N);
}

RationalArc dirichlet_approx(double t, i64 N) {
    require(std::isfinite(t) && t >= 0.0 && t <= 1.0, ErrorCode::InvalidArgument,
            "dirichlet_approx: t must lie in [0, 1]");
    require(N >= 2, ErrorCode::InvalidArgument, "dirichlet_approx: N must be >= 2");

    const ExactDouble x = exact_value(t);
    const cpp_int twoN = cpp_int(2) * N;
    // t < 1/(2N)
    if (x.num * twoN < x.den) return {0, 1, t};
    // t > 1 - 1/(2N)
    if ((x.den - x.num) * twoN < x.den) {
        return {1, 1, static_cast<double>(static_cast<long double>(t) - 1.0L)};
    }

    // Continued-fraction convergents of num/den.
    cpp_int num = x.num, den = x.den;
    i64 p_prev = 1, q_prev = 0;
    i64 p_cur = 0, q_cur = 1;
    bool first = true;
    RationalArc fallback{0, 1, t};
    while (den != 0) {
        const cpp_int a_big = num / den;
        const cpp_int rem = num - a_big * den;
        num = den;
        den = rem;
        if (first) {
            p_cur = static_cast<i64>(a_big);
            q_cur = 1;
            p_prev = 1;
            q_prev = 0;
            first = false;
        } else {
            // q_next = a q_cur + q_prev; stop once it exceeds N.
            const cpp_int q_next = a_big * q_cur + q_prev;
            if (q_next > N) break;
            const i64 a = static_cast<i64>(a_big);
            const i64 p_next = a * p_cur + p_prev;
            p_prev = p_cur;
            q_prev = q_cur;
            p_cur = p_next;
            q_cur = static_cast<i64>(q_next);
        }
        if (within_exact(x, p_cur, q_cur, N)) {
            const long double phi =
                static_cast<long double>(t) - static_cast<long double>(p_cur) / q_cur;
            RationalArc arc{p_cur, q_cur, static_cast<double>(phi)};
            if (q_cur >= 2) return arc;
            fallback = arc;
        }
    }
    // No convergent with q >= 2 qualifies. A non-convergent arc can still
    // exist (e.g. 1/N for t just below 1/(N+1)); take the smallest such q.
    for (i64 q = 2; q <= N; ++q) {
        const auto a0 = static_cast<i64>(std::floor(t * static_cast<double>(q)));
        for (i64 a = std::max<i64>(a0 - 1, 0); a <= std::min(a0 + 2, q); ++a) {
            if (gcd(a, q) != 1 || !within_exact(x, a, q, N)) continue;
            const long double phi = static_cast<long double>(t) - static_cast<long double>(a) / q;
            return {a, q, static_cast<double>(phi)};
        }
    }
    return fallback;
}

}  // namespace trl
