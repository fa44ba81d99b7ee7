#pragma once

// The eigenspace projector kernel K(x) = sum_{|k|^2 = lambda} e(k.x) and its
// circle-method pieces. All pieces are t-integrals of
//   P(t, x) = prod_j G(t, x_j) e(-lambda t)
// against cutoffs in t:
//   K_0     : eta_0(N t) around t = 0,
//   K^Q     : c_Q sum_{q prime in [Q,2Q], 1<=a<q} eta((t - a/q) Q^2),
//   K_{Q,s} : sum_{Q<=q<2Q, (a,q)=1} eta((t - a/q) N 2^s),
// and K_err = K - K_0 - sum K_{Q,s}.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trl/bump.hpp"
#include "trl/expsum.hpp"
#include "trl/lattice.hpp"
#include "trl/propagator.hpp"

namespace trl {

struct KernelSpec {
    int d = 0;
    i64 N = 0;
    i64 lambda = 0;  // N^2
    Shell shell;
};

/// Shell for lambda = N^2, from the cache when one is given.
KernelSpec make_kernel_spec(int d, i64 N, ShellCache* cache = nullptr);

/// Wraps an already enumerated shell; requires shell.lambda == N^2.
KernelSpec make_kernel_spec(Shell shell, i64 N);

/// Value plus accumulated quadrature error estimate.
struct QuadResult {
    cplx value{};
    double err = 0.0;
};

cplx kernel_direct_complex(const KernelSpec& spec, std::span<const double> x);

/// Real part of the shell sum (the imaginary part cancels by k -> -k).
double kernel_direct(const KernelSpec& spec, std::span<const double> x);

/// Smallest admissible trapezoid sample count 2 d (2N)^2 + 1.
i64 nyquist_samples(int d, i64 N);

/// (1/M) sum_i prod_j G(i/M, x_j) e(-lambda i/M). Throws NyquistViolation
/// when M < nyquist_samples(d, N).
double kernel_t_integral(const KernelSpec& spec, std::span<const double> x, i64 M);

/// |k|^2 - lambda and prod_j gamma(k_j / N).
i64 frequency_offset(const KernelSpec& spec, std::span<const std::int32_t> k);
double gamma_product(const KernelSpec& spec, std::span<const std::int32_t> k);

// ---- K_0 ----

/// N^{-1} hat(eta_0)(l / N) prod gamma(k_j / N), l = |k|^2 - lambda.
double k0_fourier(const KernelSpec& spec, std::span<const std::int32_t> k);

/// The t-integral against eta_0(N t), |t| <= 1/(10N).
QuadResult k0_eval(const KernelSpec& spec, std::span<const double> x);

// ---- K^Q, prime arcs ----

struct ArcCutoffPrime {
    i64 Q = 0;
    std::vector<i64> primes;  // D_Q: primes in [Q, 2Q]
    i64 arc_count = 0;        // #R_Q = sum (q - 1)
    double c_Q = 0.0;         // makes int_0^1 eta_Q = 1

    /// Requires N <= Q <= N^2. EmptyArcSet when [Q, 2Q] holds no prime.
    static ArcCutoffPrime make(i64 Q, i64 N);
    /// Support half-width of each arc in t.
    double half_width() const { return arc_bump().support() / static_cast<double>(Q * Q); }
};

QuadResult kQ_eval(const KernelSpec& spec, std::span<const double> x, const ArcCutoffPrime& arcs);

/// Fourier coefficient of K - K^Q:
///   0 if l = 0, else -c_Q Q^{-2} hat(eta)(l/Q^2) sum_{q in D_Q} (q-1 if q | l else -1),
/// times prod gamma(k_j / N).
double kerr_fourier(const KernelSpec& spec, std::span<const std::int32_t> k, const ArcCutoffPrime& arcs);

// ---- K_{Q,s}, dyadic arcs ----

struct ArcCutoffDyadic {
    i64 Q = 0;
    int s = 0;
    i64 N = 0;
    bool filled = false;  // top level: centre of each arc included

    /// Q a power of two >= 2, Q < 2^s < N, and disjoint supports.
    static ArcCutoffDyadic make(i64 Q, int s, i64 N);
    double scale() const { return static_cast<double>(N) * std::ldexp(1.0, s); }  // N 2^s
    const BumpProfile& profile() const { return filled ? filled_bump() : annular_bump(); }
    double half_width() const { return profile().support() / scale(); }
};

/// All admissible (Q, s) for the given N; the largest 2^s uses the filled profile.
std::vector<ArcCutoffDyadic> dyadic_grid(i64 N);

/// (N 2^s)^{-1} hat(eta)(l / (N 2^s)) sum_{Q<=q<2Q} c_q(l) prod gamma(k_j / N).
double kQs_fourier(const KernelSpec& spec, std::span<const std::int32_t> k, const ArcCutoffDyadic& arcs);

QuadResult kQs_eval(const KernelSpec& spec, std::span<const double> x, const ArcCutoffDyadic& arcs);

struct Decomposition {
    double K = 0.0;
    cplx K0{}, KQs{}, Kerr{};
    double quad_err = 0.0;
};

/// K, K_0, sum K_{Q,s} and K_err = K - K_0 - sum K_{Q,s} at one x.
Decomposition kerr_eval(const KernelSpec& spec, std::span<const double> x, const std::vector<ArcCutoffDyadic>& grid);

// ---- grid identities (small d) ----

/// Values of K on the grid (Z/M)^d, row-major with the last axis fastest.
std::vector<cplx> kernel_on_grid(const KernelSpec& spec, i64 M);

/// In-place separable DFT on (Z/M)^d: c(k) = M^{-d} sum_x f(x) e(-k.x).
void grid_dft(std::vector<cplx>& values, int d, i64 M);

/// M^{-d} sum_grid |K|^2 on M = 2N + 1 (equals the shell count). d <= 3.
double grid_parseval(const KernelSpec& spec);

// ---- sup-norm scans ----

enum class KernelPiece { K, K0, KQ, KQs, Kerr };

std::string to_string(KernelPiece piece);

struct ScanRow {
    KernelPiece piece;
    int d;
    i64 N, Q;
    int s;
    std::size_t x_index;
    cplx value;
    double bound, ratio;
};

/// Scan points: x = 0, the corners of {0, 1/2}^d (at most 64), then the
/// Kronecker sequence, `points` in total.
std::vector<std::vector<double>> scan_points(int d, std::size_t points);

/// Power-law reference for each piece (epsilon-factors set to 1):
///   K, K0: N^{d-2};  K^Q: log Q N^2 Q^{(d-4)/2};
///   K_{Q,s}: (N 2^s)^{d/2-1} Q^{-(d-4)/2};  K_err: N^{(d-1)/2}.
double piece_bound(KernelPiece piece, int d, i64 N, i64 Q, int s);

std::vector<ScanRow> kernel_sup_scan(const KernelSpec& spec, KernelPiece piece, i64 Q, int s, std::size_t points);

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

// ---- Fourier coefficient bounds ----

struct FourierBoundRow {
    KernelPiece piece;   // Kerr (= K - K^Q) or KQs
    i64 Q = 0;
    int s = 0;
    std::size_t samples = 0;
    double max_abs = 0;  // max |coefficient| over the sampled k
    i64 argmax_l = 0;    // |k|^2 - lambda at the maximum
    double scaled = 0;   // Kerr: max_abs Q / log Q;  KQs: max_abs / ceiling
    double ceiling = 0;  // KQs: Q^2 / (N 2^s) max |hat eta|
};

/// Sampled k: the shell itself, then uniform points of [-2N, 2N]^d with
/// nonzero gamma weight. Kerr rows for each Q in Q_list (prime arcs), KQs rows
/// for the whole dyadic grid.
std::vector<FourierBoundRow> fourier_bounds_experiment(const KernelSpec& spec, const std::vector<i64>& Q_list,
                                                       std::size_t samples, std::uint64_t seed);

void write_fourier_csv(std::ostream& out, const KernelSpec& spec, const std::vector<FourierBoundRow>& rows);

}  // namespace trl
