#include "trl/expsum.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "trl/error.hpp"

namespace trl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Two-level summation: blocks of up to kBlock terms, then the block sums.
constexpr std::size_t kBlock = 64;

class BlockSum {
public:
    void add(cplx z) {
        block_ += z;
        if (++in_block_ == kBlock) flush();
    }
    cplx total() {
        flush();
        return total_;
    }
    std::size_t blocks() const { return blocks_; }

private:
    void flush() {
        if (in_block_ == 0) return;
        total_ += block_;
        block_ = 0.0;
        in_block_ = 0;
        ++blocks_;
    }
    cplx block_{}, total_{};
    std::size_t in_block_ = 0;
    std::size_t blocks_ = 0;
};

// Rounding bound for n unit-modulus table terms summed with BlockSum.
double direct_err(std::size_t n) {
    if (n == 0) return 0.0;
    const double block = static_cast<double>(std::min(n, kBlock));
    const double blocks = std::ceil(static_cast<double>(n) / static_cast<double>(kBlock));
    return (6.0 + block + blocks) * kEps * static_cast<double>(n);
}

i64 mulmod_checked(i64 a, i64 b, i64 q) { return mulmod(a, b, q); }

// S(A, m, p^j) for gcd(A, p) = 1, unnormalized closed forms per prime power.
cplx gauss_prime_power(i64 A, i64 m, const PrimePower& pp) {
    const i64 P = static_cast<i64>(pp.value);
    if (pp.prime != 2) {
        const i64 a_inv = mod_inverse(A, P);
        const i64 four_inv = mod_inverse(4, P);
        const i64 m2 = mulmod_checked(m, m, P);
        const i64 phase = mod(-mulmod_checked(mulmod_checked(four_inv, a_inv, P), m2, P), P);
        return unit_root(phase, P) * static_cast<double>(jacobi_symbol(A, P)) * gauss_standard_odd(P);
    }
    if (pp.exponent == 1) {
        // (1 + e((A + m)/2)) / 2 with A odd
        return mod(m, 2) == 1 ? cplx(1.0) : cplx(0.0);
    }
    if (mod(m, 2) == 1) return 0.0;  // 4 | q and m odd
    // Complete the square: A k^2 + 2 m' k = A (k + A* m')^2 - A* m'^2.
    const i64 half = m / 2;
    const i64 a_inv = mod_inverse(A, P);
    const i64 phase = mod(-mulmod_checked(a_inv, mulmod_checked(half, half, P), P), P);
    // sum_k e(A k^2 / 2^j) = (2^j / A) (1 + i^A) 2^{j/2} for j >= 2
    const i64 a_res = mod(A, P);
    const int sym = jacobi_symbol(P, a_res);
    const cplx i_pow = (a_res % 4 == 1) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
    const cplx g = static_cast<double>(sym) * (1.0 + i_pow) / std::sqrt(static_cast<double>(P));
    return unit_root(phase, P) * g;
}

ExpSumValue twisted_kloosterman(i64 alpha, i64 beta, i64 q, bool with_jacobi) {
    require(q >= 1, ErrorCode::InvalidArgument, "modulus must be >= 1");
    if (with_jacobi) {
        require(q % 2 == 1, ErrorCode::EvenModulus, "Salie sum needs odd modulus, got " + std::to_string(q));
    }
    const RootTable roots(q);
    const i64 al = mod(alpha, q), be = mod(beta, q);
    BlockSum sum;
    std::size_t terms = 0;
    for (i64 a = 0; a < q; ++a) {
        if (gcd(a, q) != 1) continue;
        const i64 a_inv = mod_inverse(a, q);
        const i64 r = (static_cast<i64>((static_cast<i128>(a) * al + static_cast<i128>(a_inv) * be) % q));
        cplx term = roots(r);
        if (with_jacobi) term *= static_cast<double>(jacobi_symbol(a, q));
        sum.add(term);
        ++terms;
    }
    return {sum.total(), direct_err(terms)};
}

}  // namespace

cplx unit_root(i64 r, i64 q) noexcept {
    i64 x = mod(r, q);
    if (2 * x > q) x -= q;  // symmetric residue keeps the angle small
    const long double ang = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(x) /
                            static_cast<long double>(q);
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
}

cplx expi2pi(double x) noexcept {
    const long double frac = static_cast<long double>(x) - std::nearbyint(static_cast<long double>(x));
    const long double ang = 2.0L * std::numbers::pi_v<long double> * frac;
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
}

RootTable::RootTable(i64 q) : q_(q) {
    require(q >= 1, ErrorCode::InvalidArgument, "RootTable modulus must be >= 1");
    block_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(q))));
    low_.resize(block_);
    for (std::size_t i = 0; i < block_; ++i) low_[i] = unit_root(static_cast<i64>(i), q);
    const std::size_t highs = static_cast<std::size_t>(q) / block_ + 1;
    high_.resize(highs);
    for (std::size_t j = 0; j < highs; ++j) high_[j] = unit_root(static_cast<i64>(j * block_), q);
}

ExpSumValue gauss_sum_direct(i64 a, i64 m, i64 q, GaussSign sign) {
    require(q >= 1, ErrorCode::InvalidArgument, "gauss_sum_direct: q must be >= 1");
    if (sign == GaussSign::Minus) m = -m;
    if (q == 1) return {1.0, 0.0};
    const RootTable roots(q);
    const i64 A = mod(a, q), M = mod(m, q);
    // r_k = A k^2 + M k mod q, updated incrementally: r_{k+1} = r_k + A(2k+1) + M
    i64 r = 0;
    i64 step = mod(A + M, q);      // A(2k+1) + M at k = 0
    const i64 step_inc = mod(2 * A, q);
    BlockSum sum;
    for (i64 k = 0; k < q; ++k) {
        sum.add(roots(r));
        r += step;
        if (r >= q) r -= q;
        step += step_inc;
        if (step >= q) step -= q;
    }
    const double inv_q = 1.0 / static_cast<double>(q);
    return {sum.total() * inv_q, direct_err(static_cast<std::size_t>(q)) * inv_q};
}

cplx gauss_standard_odd(i64 q) {
    require(q >= 1 && q % 2 == 1, ErrorCode::EvenModulus, "gauss_standard_odd: q must be odd");
    const double mag = 1.0 / std::sqrt(static_cast<double>(q));
    return q % 4 == 1 ? cplx(mag, 0.0) : cplx(0.0, mag);
}

ExpSumValue gauss_sum_reduced(i64 a, i64 m, i64 q, GaussSign sign) {
    require(q >= 1, ErrorCode::InvalidArgument, "gauss_sum_reduced: q must be >= 1");
    require(gcd(a, q) == 1, ErrorCode::NotCoprime,
            "gauss_sum_reduced: gcd(" + std::to_string(a) + ", " + std::to_string(q) + ") > 1");
    if (sign == GaussSign::Minus) m = -m;
    if (q == 1) return {1.0, 0.0};
    const auto factors = factorize(static_cast<u64>(q));
    cplx value = 1.0;
    for (const auto& pp : factors) {
        const i64 P = static_cast<i64>(pp.value);
        const i64 cofactor = q / P;
        // S(a, m, P R) = S(a R, m, P) S(a P, m, R), applied factor by factor
        const i64 A = mulmod(a, cofactor, P);
        value *= gauss_prime_power(A, mod(m, P), pp);
    }
    const double err = 16.0 * static_cast<double>(factors.size() + 1) * kEps * std::sqrt(2.0 / static_cast<double>(q));
    return {value, err};
}

ExpSumValue kloosterman(i64 alpha, i64 beta, i64 q) { return twisted_kloosterman(alpha, beta, q, false); }

ExpSumValue salie(i64 alpha, i64 beta, i64 q) { return twisted_kloosterman(alpha, beta, q, true); }

ExpSumValue singular_series(const SingularSeriesParams& params) {
    const i64 q = params.q;
    require(q >= 2, ErrorCode::InvalidArgument, "singular_series: q must be >= 2");
    require(params.d() >= 1, ErrorCode::InvalidArgument, "singular_series: empty m");
    BlockSum sum;
    double err = 0.0;
    for (i64 a = 1; a < q; ++a) {
        if (gcd(a, q) != 1) continue;
        cplx prod = unit_root(-mulmod(params.lambda, a, q), q);
        double term_err = 4.0 * kEps;
        for (i64 mj : params.m) {
            const ExpSumValue s = gauss_sum_direct(a, mj, q);
            prod *= s.value;
            term_err += s.err_bound + 4.0 * kEps;
        }
        sum.add(prod);
        err += term_err;
    }
    return {sum.total(), err + direct_err(static_cast<std::size_t>(totient(q)))};
}

i64 singular_series_nu(const std::vector<i64>& m, i64 q) {
    require(q % 2 == 1, ErrorCode::EvenModulus, "nu needs odd modulus");
    i64 norm = 0;
    for (i64 mj : m) norm = mod(norm + mulmod(mj, mj, q), q);
    return mod(-mulmod(mod_inverse(4, q), norm, q), q);
}

ExpSumValue singular_series_reduced(const SingularSeriesParams& params) {
    const i64 q = params.q;
    require(q >= 2, ErrorCode::InvalidArgument, "singular_series_reduced: q must be >= 2");
    require(q % 2 == 1, ErrorCode::EvenModulus,
            "singular_series_reduced: q = " + std::to_string(q) + " is even");
    const int d = params.d();
    const i64 nu = singular_series_nu(params.m, q);
    const ExpSumValue inner = (d % 2 == 0) ? kloosterman(-params.lambda, nu, q) : salie(-params.lambda, nu, q);
    const cplx g = gauss_standard_odd(q);
    const cplx gd = std::pow(g, d);
    const double gmag = std::abs(gd);
    return {gd * inner.value, gmag * inner.err_bound + 8.0 * d * kEps * gmag * std::abs(inner.value)};
}

}  // namespace trl
