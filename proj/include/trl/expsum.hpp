#pragma once

// Complete exponential sums: normalized generalized quadratic Gauss sums
// S(a,m,q) = (1/q) sum_k e((a k^2 + m k)/q), Kloosterman and Salie sums, and
// the singular series. Direct summation is the reference; the reduced
// evaluators go through factorization and closed forms.

#include <complex>
#include <vector>

#include "trl/arith.hpp"

namespace trl {

using cplx = std::complex<double>;

/// A double-precision sum together with a worst-case rounding bound.
struct ExpSumValue {
    cplx value{};
    double err_bound = 0.0;
};

/// Sign of the linear term. Plus is e((a k^2 + m k)/q); Minus is the
/// e((a k^2 - m k)/q) variant produced by Poisson summation of the propagator.
enum class GaussSign { Plus, Minus };

/// e(r/q) for integer r, reduced modulo q before the trigonometric call.
cplx unit_root(i64 r, i64 q) noexcept;

/// e(x) for real x.
cplx expi2pi(double x) noexcept;

/// Table-driven e(r/q) for a fixed modulus: two tables of size ~sqrt(q).
class RootTable {
public:
    explicit RootTable(i64 q);
    cplx operator()(i64 r) const noexcept {
        const auto idx = static_cast<std::size_t>(r);
        return high_[idx / block_] * low_[idx % block_];
    }
    i64 modulus() const noexcept { return q_; }

private:
    i64 q_;
    std::size_t block_;
    std::vector<cplx> low_;
    std::vector<cplx> high_;
};

ExpSumValue gauss_sum_direct(i64 a, i64 m, i64 q, GaussSign sign = GaussSign::Plus);

/// Requires gcd(a, q) = 1 (NotCoprime otherwise).
ExpSumValue gauss_sum_reduced(i64 a, i64 m, i64 q, GaussSign sign = GaussSign::Plus);

/// S(1,0,q) for odd q: q^{-1/2} when q = 1 mod 4, i q^{-1/2} when q = 3 mod 4.
cplx gauss_standard_odd(i64 q);

/// Kl(alpha, beta, q) = sum_{(a,q)=1} e((a alpha + a* beta)/q).
ExpSumValue kloosterman(i64 alpha, i64 beta, i64 q);

/// Sa(alpha, beta, q) = sum_{(a,q)=1} (a/q) e((a alpha + a* beta)/q), q odd.
ExpSumValue salie(i64 alpha, i64 beta, i64 q);

struct SingularSeriesParams {
    std::vector<i64> m;  // one entry per dimension
    i64 q = 2;
    i64 lambda = 0;

    int d() const { return static_cast<int>(m.size()); }
};

/// sum_{(a,q)=1} prod_j S(a, m_j, q) e(-lambda a / q) by direct summation.
ExpSumValue singular_series(const SingularSeriesParams& params);

/// Odd q only: S(1,0,q)^d times Kl(-lambda, nu, q) (d even) or
/// Sa(-lambda, nu, q) (d odd), with nu = -4*(m_1^2 + ... + m_d^2) mod q.
ExpSumValue singular_series_reduced(const SingularSeriesParams& params);

/// nu = -4* (sum m_j^2) mod q for odd q.
i64 singular_series_nu(const std::vector<i64>& m, i64 q);

}  // namespace trl
