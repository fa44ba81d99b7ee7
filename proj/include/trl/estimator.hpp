#pragma once

// Eigenfunctions F(x) = sum_{k in shell} a_k e(k.x) with sum |a_k|^2 = 1,
// quasi-Monte-Carlo L^p norms and level sets, exact even norms, and the
// restriction scaling experiment.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trl/energy.hpp"
#include "trl/expsum.hpp"
#include "trl/lattice.hpp"

namespace trl {

enum class Model { Constant, Rademacher, Gaussian, Custom };

std::string to_string(Model m);
Model parse_model(const std::string& name);  // InvalidArgument on unknown names

struct Eigenfunction {
    Shell shell;
    std::vector<cplx> coeffs;
    Model model = Model::Constant;
    u64 seed = 0;
};

/// Deterministic in (model, seed). EmptyShell when the shell has no points.
Eigenfunction make_eigenfunction(Shell shell, Model model, u64 seed = 0);

/// Arbitrary coefficients, rescaled to unit l^2 norm.
Eigenfunction make_custom_eigenfunction(Shell shell, std::vector<cplx> coeffs);

/// Direct summation in shell order, one table of e(j x_i) per axis.
cplx evaluate_F(const Eigenfunction& f, std::span<const double> x);

/// |F| at `samples` QMC points: kReplicates contiguous blocks, each a
/// Kronecker run with its own random shift drawn from (seed, block). A single
/// shifted run has a skewed error distribution; many short independent runs
/// keep the jackknife error bars honest.
inline constexpr std::size_t kReplicates = 128;
std::vector<double> sample_abs(const Eigenfunction& f, std::size_t samples, u64 seed = 0);

struct NormEstimate {
    double estimate = 0;      // (mean |F|^p)^{1/p}
    double std_error = 0;     // jackknife over replicates, on the norm
    double power_mean = 0;    // mean |F|^p
    double power_error = 0;   // jackknife standard error of power_mean
    double sample_max = 0;    // max |F| seen (the p = infinity surrogate)
    double ceiling = 0;       // sum |a_k| >= sup |F|
    std::size_t samples = 0;
};

/// Requires samples >= 1000 and p >= 1.
NormEstimate lp_norm_mc(const Eigenfunction& f, double p, std::size_t samples, u64 seed = 0);
NormEstimate lp_norm_from_samples(std::span<const double> abs_values, double p);

/// sum_v |b_n(v)|^2 with b_n the n-fold convolution of the coefficients;
/// equals ||F||_{2n}^{2n}. Unnormalized coefficients are allowed.
long double weighted_energy(const Shell& shell, std::span<const cplx> coeffs, int n,
                            const sparse::ConvLimits& limits = {});

struct EvenNorm {
    double norm = 0;          // ||F||_{2n}
    long double power = 0;    // ||F||_{2n}^{2n}
    bool via_grid = false;    // constant model evaluated on the Nyquist grid
};

/// p = 2n. Constant coefficients go through the integer energy (or the
/// Nyquist grid when the convolution is over budget).
EvenNorm lp_norm_even_exact(const Eigenfunction& f, int p, const sparse::ConvLimits& limits = {});

struct LevelSetEstimate {
    double alpha = 0;
    double measure = 0;
    double std_error = 0;
    std::size_t samples = 0;
};

LevelSetEstimate level_set_measure(const Eigenfunction& f, double alpha, std::size_t samples, u64 seed = 0);

/// Level sets for many heights on one common sample set.
std::vector<LevelSetEstimate> level_set_sweep(std::span<const double> abs_values, std::span<const double> alphas);

/// N^{(d-2)/2 - d/p} + 1.
double conjecture_rhs(int d, double p, i64 N);

struct CriticalExponents {
    double stein_tomas;    // 2(d+1)/(d-1)
    double balance;        // 2d/(d-2)
    double range_d3;       // 2d/(d-3)
    double range_d4;       // 2d/(d-4)
};

/// DimensionTooSmall when some denominator is <= 0 (d <= 4).
CriticalExponents critical_exponents(int d);

struct RestrictionRow {
    i64 N = 0;
    std::size_t count = 0;
    NormEstimate mc;
    bool has_exact = false;
    EvenNorm exact;
    double rhs = 0;
    double ratio = 0;            // norm / rhs, exact norm when available
    double focusing_ratio = 0;   // int_{|x| < 1/(10N)} |F|^p / (count^{p/2} N^{-d})
};

struct RestrictionScaling {
    int d = 0;
    double p = 0;
    Model model = Model::Constant;
    u64 seed = 0;
    std::size_t samples = 0;
    std::vector<RestrictionRow> rows;
    double target_slope = 0;     // (d-2)/2 - d/p
    double slope = 0;            // fitted on rows excluding the smallest N
    bool slope_from_exact = false;
};

struct RestrictionOptions {
    std::size_t samples = 20000;
    std::size_t focus_samples = 4000;
    u64 seed = 0;
    bool exact = true;           // compute exact even norms when p is even
    ShellCache* cache = nullptr;
    sparse::ConvLimits limits{};
};

RestrictionScaling restriction_scaling_experiment(int d, double p, const std::vector<i64>& N_list, Model model,
                                                  const RestrictionOptions& opt = {});

/// CSV: d,N,p,model,seed,norm,std_error,rhs,ratio
void write_restriction_csv(std::ostream& out, const RestrictionScaling& rep);
/// JSON summary with the fitted slope, target and per-row focusing ratios.
std::string restriction_summary_json(const RestrictionScaling& rep);

}  // namespace trl
