#pragma once

// Additive energy of lattice shells: E_n(A) = #{(a_1..a_2n) in A^2n :
// a_1 + ... + a_n = a_{n+1} + ... + a_2n} = sum_v r_n(v)^2, where r_n counts
// n-tuples with sum v. For A the shell of radius N this is ||K||_{2n}^{2n}.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "trl/lattice.hpp"
#include "trl/sparse_conv.hpp"

namespace trl {

using BigInt = boost::multiprecision::cpp_int;

/// Representation function r_n as a sorted sparse vector (packed keys).
struct RepCounts {
    int d = 0;
    int n = 0;
    sparse::Vec<u64> counts;

    std::size_t support() const { return counts.size(); }
    /// Decoded histogram; only sensible for small supports.
    std::map<std::vector<std::int32_t>, u64> histogram() const;
};

struct EnergyReport {
    int d = 0;
    i64 lambda = 0;
    int n = 0;
    std::size_t count = 0;
    RepCounts rep;
    BigInt energy;
    std::size_t sumset_size = 0;
    BigInt cs_floor;  // ceil(count^2n / sumset_size)
};

/// Works on raw point lists as well as shells (d <= 9, |coords| * n small).
RepCounts representation_counts(int d, std::span<const std::int32_t> coords, int n,
                                const sparse::ConvLimits& limits = {});
RepCounts representation_counts(const Shell& shell, int n, const sparse::ConvLimits& limits = {});

BigInt additive_energy(const Shell& shell, int n, const sparse::ConvLimits& limits = {});
EnergyReport energy_report(const Shell& shell, int n, const sparse::ConvLimits& limits = {});

/// Literal count over (2n-1)-tuples, the last point looked up. ScaleExceeded
/// when #points^(2n-1) > max_ops.
BigInt additive_energy_bruteforce(int d, std::span<const std::int32_t> coords, int n, double max_ops = 1e9);

/// ceil(count^2n / sumset).
BigInt cs_floor(std::size_t count, std::size_t sumset, int n);

/// ||K||_{2n}^{2n} on the Nyquist grid M = 2nN+1, using the sign and
/// permutation symmetry of the shell. Exact up to rounding; for instances the
/// convolution cannot reach. ScaleExceeded above max_ops.
long double energy_nyquist(const Shell& shell, i64 N, int n, double max_ops = 4e10);

/// Operation count energy_nyquist would need.
double energy_nyquist_cost(const Shell& shell, i64 N, int n);

struct EnergyRow {
    i64 N = 0;
    std::size_t count = 0;
    long double energy = 0;   // exact integer when `exact`
    BigInt energy_exact;
    bool exact = false;
    std::size_t sumset_size = 0;  // 0 on the grid path
    BigInt cs_floor;
    double ratio = 0;      // E / N^{2n(d-2)-d}
    double cs_ratio = 0;
};

struct EnergyScaling {
    int d = 0, n = 0;
    double target_exponent = 0;  // 2n(d-2) - d
    std::vector<EnergyRow> rows;
    double slope = 0;            // fitted on rows excluding the smallest N
};

/// Convolution path where the limits allow it, otherwise the Nyquist grid
/// (no sumset, cs floor omitted on those rows).
EnergyScaling energy_scaling_experiment(int d, int n, const std::vector<i64>& N_list, ShellCache* cache = nullptr,
                                        const sparse::ConvLimits& limits = {});

void write_energy_csv(std::ostream& out, const EnergyScaling& rep);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace trl
