#pragma once

// The 1-D periodic Schroedinger propagator
//   G(t, x) = sum_k gamma(k/N) e(k x + k^2 t),
// its Poisson expansion sum_m S(a, -m, q) J(x, phi, m, q) on a rational arc,
// and dispersive-bound scans.

#include <complex>
#include <iosfwd>
#include <vector>

#include "trl/arith.hpp"
#include "trl/bump.hpp"
#include "trl/expsum.hpp"

namespace trl {

/// Direct sum over |k| <= 2N in ascending k. Phases k x and k^2 t are
/// reduced modulo 1 in extended precision.
cplx propagator_G(double t, double x, i64 N);

/// Fast evaluator for many (t, x) at fixed N: cached cutoff weights and a
/// re-anchored multiplicative recurrence for the phases.
class Propagator {
public:
    explicit Propagator(i64 N);
    i64 N() const noexcept { return N_; }
    cplx operator()(double t, double x) const noexcept;
    /// sum_k gamma(k/N), the value at t = x = 0.
    double mass() const noexcept { return mass_; }
    const std::vector<double>& weights() const noexcept { return weights_; }  // index k + 2N

private:
    i64 N_;
    std::vector<double> weights_;
    double mass_ = 0.0;
};

/// J(x, phi, m, q) = int gamma(y/N) e((x + m/q) y + phi y^2) dy over [-2N, 2N].
/// Throws QuadratureNonConvergence when the absolute tolerance 1e-9 N is not met.
cplx oscillatory_J(double x, double phi, i64 m, i64 q, i64 N);

/// Window half-width guaranteeing negligible truncation: the larger of
/// 8 max(1, q/N) + 16 and the stationary-phase range plus decay margin.
i64 default_m_window(const RationalArc& arc, double x, i64 N);

/// sum_{|m - m0| <= m_window} S(a, -m, q) J(x, phi, m, q), m0 = round(-x q).
cplx poisson_decomposition(const RationalArc& arc, double x, i64 N, i64 m_window);

struct DispersiveRow {
    double t, x;
    i64 q, a;
    double phi, absG, bound, ratio;
};

struct DispersiveReport {
    i64 N = 0;
    double max_ratio = 0.0;           // C* over the (t, x) grid
    double max_ratio_t = 0.0, max_ratio_x = 0.0;
    double prime_arc_max = 0.0;       // max |G| / sqrt(q) over odd prime q in [N, 2N]
    i64 prime_arc_q = 0;
    bool all_finite_positive = true;
    std::vector<std::size_t> histogram;  // ratio counts in bins of width 0.25 on [0, 8), last bin open
    std::vector<DispersiveRow> rows;     // grid rows (kept only when requested)
};

/// Grid t_i = i / t_samples (i = 0..t_samples), x_j = j / x_samples.
DispersiveReport dispersive_ratio_scan(i64 N, i64 t_samples, i64 x_samples, bool keep_rows = false);

void write_dispersive_csv(std::ostream& out, const DispersiveReport& report);

}  // namespace trl
