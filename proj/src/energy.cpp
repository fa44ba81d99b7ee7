#include "trl/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "trl/error.hpp"
#include "trl/expsum.hpp"
#include "trl/parallel.hpp"

namespace trl {

namespace {

using u128 = unsigned __int128;

BigInt to_big(u128 v) {
    BigInt hi = static_cast<u64>(v >> 64);
    return (hi << 64) + static_cast<u64>(v);
}

struct KeyHash {
    std::size_t operator()(sparse::Key k) const noexcept {
        const auto u = static_cast<u128>(k);
        const u64 h = static_cast<u64>(u) ^ (static_cast<u64>(u >> 64) * 0x9E3779B97F4A7C15ull);
        return std::hash<u64>{}(h * 0xBF58476D1CE4E5B9ull);
    }
};

void check_coords(std::span<const std::int32_t> coords, int n) {
    i64 big = 0;
    for (std::int32_t c : coords) big = std::max<i64>(big, std::abs(static_cast<i64>(c)));
    require(big * 2 * n <= sparse::kCoordLimit, ErrorCode::ScaleExceeded,
            "coordinates too large for packed keys");
}

sparse::Vec<u64> power(const sparse::Vec<u64>& base, int n, const sparse::ConvLimits& limits) {
    auto mul = [](u64 a, u64 b) { return a * b; };
    if (n == 1) return base;
    if (n % 2 == 0) {
        const auto half = power(base, n / 2, limits);
        return sparse::convolve(half, half, limits, mul);
    }
    return sparse::convolve(power(base, n - 1, limits), base, limits, mul);
}

double exponent_target(int d, int n) { return 2.0 * n * (d - 2) - d; }

}  // namespace

std::map<std::vector<std::int32_t>, u64> RepCounts::histogram() const {
    std::map<std::vector<std::int32_t>, u64> out;
    for (const auto& [k, c] : counts) out.emplace(sparse::unpack(k, d), c);
    return out;
}

RepCounts representation_counts(int d, std::span<const std::int32_t> coords, int n,
                                const sparse::ConvLimits& limits) {
    require(n >= 1, ErrorCode::InvalidArgument, "fold count must be >= 1");
    require(d >= 1 && d <= kMaxDimension, ErrorCode::InvalidArgument, "bad dimension");
    check_coords(coords, n);
    const std::size_t count = coords.size() / static_cast<std::size_t>(d);
    // every partial count is at most count^n, so u64 arithmetic cannot wrap
    require(count == 0 || n * std::log2(static_cast<double>(count)) < 63.0, ErrorCode::ScaleExceeded,
            "r_n counts would exceed 64 bits");
    RepCounts rep;
    rep.d = d;
    rep.n = n;
    if (count == 0) return rep;
    sparse::Vec<u64> base;
    base.reserve(count);
    for (std::size_t i = 0; i < count; ++i) base.emplace_back(sparse::pack(coords.subspan(i * d, d)), 1);
    sparse::normalize(base);
    rep.counts = power(base, n, limits);
    return rep;
}

RepCounts representation_counts(const Shell& shell, int n, const sparse::ConvLimits& limits) {
    return representation_counts(shell.d, shell.coords, n, limits);
}

BigInt additive_energy(const Shell& shell, int n, const sparse::ConvLimits& limits) {
    return energy_report(shell, n, limits).energy;
}

EnergyReport energy_report(const Shell& shell, int n, const sparse::ConvLimits& limits) {
    EnergyReport rep;
    rep.d = shell.d;
    rep.lambda = shell.lambda;
    rep.n = n;
    rep.count = shell.count();
    rep.rep = representation_counts(shell, n, limits);
    u128 e = 0;
    for (const auto& [k, c] : rep.rep.counts) e += static_cast<u128>(c) * c;
    rep.energy = to_big(e);
    rep.sumset_size = rep.rep.support();
    rep.cs_floor = cs_floor(rep.count, rep.sumset_size, n);
    return rep;
}

BigInt cs_floor(std::size_t count, std::size_t sumset, int n) {
    if (sumset == 0) return 0;
    const BigInt num = boost::multiprecision::pow(BigInt(count), 2 * n);
    BigInt q = num / sumset;
    if (q * sumset < num) q += 1;
    return q;
}

BigInt additive_energy_bruteforce(int d, std::span<const std::int32_t> coords, int n, double max_ops) {
    require(n >= 1, ErrorCode::InvalidArgument, "fold count must be >= 1");
    check_coords(coords, n);
    const std::size_t count = coords.size() / static_cast<std::size_t>(d);
    if (count == 0) return 0;
    const int free = 2 * n - 1;
    require(std::pow(static_cast<double>(count), free) <= max_ops, ErrorCode::ScaleExceeded,
            "brute-force energy needs " + std::to_string(count) + "^" + std::to_string(free) + " tuples");
    std::vector<sparse::Key> keys(count);
    std::unordered_map<sparse::Key, u64, KeyHash> mult;
    for (std::size_t i = 0; i < count; ++i) {
        keys[i] = sparse::pack(coords.subspan(i * d, d));
        ++mult[keys[i]];
    }
    // a_1 + .. + a_n - a_{n+1} - .. - a_{2n-1} must equal a_2n
    std::vector<std::size_t> idx(static_cast<std::size_t>(free), 0);
    u128 total = 0;
    while (true) {
        sparse::Key s = 0;
        for (int j = 0; j < free; ++j) s += j < n ? keys[idx[j]] : -keys[idx[j]];
        if (auto it = mult.find(s); it != mult.end()) total += it->second;
        int j = free - 1;
        while (j >= 0 && idx[j] + 1 == count) idx[j--] = 0;
        if (j < 0) break;
        ++idx[j];
    }
    return to_big(total);
}

double energy_nyquist_cost(const Shell& shell, i64 N, int n) {
    const int d = shell.d;
    const i64 H = n * N;
    std::size_t R = 0;
    for (std::size_t i = 0; i < shell.count(); ++i) {
        const auto k = shell.point(i);
        R += std::none_of(k.begin(), k.end(), [](std::int32_t c) { return c < 0; });
    }
    double tuples = 1;
    for (int j = 1; j <= d; ++j) tuples = tuples * static_cast<double>(H + j) / j;
    return tuples * static_cast<double>(R * d);
}

long double energy_nyquist(const Shell& shell, i64 N, int n, double max_ops) {
    require(shell.lambda == N * N, ErrorCode::InvalidArgument, "shell radius must be N");
    const int d = shell.d;
    const i64 M = 2 * n * N + 1;
    const i64 H = (M - 1) / 2;
    // representatives with nonnegative coordinates, weighted by their sign orbit
    std::vector<std::int32_t> reps;
    std::vector<double> weight;
    for (std::size_t i = 0; i < shell.count(); ++i) {
        const auto k = shell.point(i);
        if (std::any_of(k.begin(), k.end(), [](std::int32_t c) { return c < 0; })) continue;
        reps.insert(reps.end(), k.begin(), k.end());
        weight.push_back(std::ldexp(1.0, static_cast<int>(std::count_if(k.begin(), k.end(), [](std::int32_t c) { return c != 0; }))));
    }
    const std::size_t R = weight.size();
    require(energy_nyquist_cost(shell, N, n) <= max_ops, ErrorCode::ScaleExceeded, "Nyquist energy grid too large");

    std::vector<double> cosines(static_cast<std::size_t>((N + 1) * (H + 1)));
    for (i64 u = 0; u <= N; ++u)
        for (i64 i = 0; i <= H; ++i) cosines[u * (H + 1) + i] = std::real(unit_root(u * i, M));

    std::vector<double> fact(static_cast<std::size_t>(d + 1), 1.0);
    for (int j = 1; j <= d; ++j) fact[j] = fact[j - 1] * j;

    std::vector<long double> partial(static_cast<std::size_t>(H + 1), 0.0L);
    parallel_for(static_cast<std::size_t>(H + 1), [&](std::size_t first) {
        std::vector<i64> idx(static_cast<std::size_t>(d), static_cast<i64>(first));
        std::vector<const double*> col(static_cast<std::size_t>(d));
        long double acc = 0;
        while (true) {
            // weight: distinct permutations times 2 for each nonzero index (i and M - i)
            double w = fact[d];
            int run = 1;
            for (int j = 1; j <= d; ++j) {
                if (j < d && idx[j] == idx[j - 1]) {
                    ++run;
                } else {
                    w /= fact[run];
                    run = 1;
                }
            }
            for (int j = 0; j < d; ++j) if (idx[j] > 0) w *= 2;
            // K(x) = sum_u w_u prod_j cos(2 pi u_j i_j / M)
            double K = 0;
            for (std::size_t r = 0; r < R; ++r) {
                double p = weight[r];
                const std::int32_t* u = &reps[r * d];
                for (int j = 0; j < d; ++j) p *= cosines[u[j] * (H + 1) + idx[j]];
                K += p;
            }
            const long double k2 = static_cast<long double>(K) * K;
            long double pw = 1;
            for (int e = 0; e < n; ++e) pw *= k2;
            acc += w * pw;
            // next nondecreasing tuple with idx[0] fixed
            int j = d - 1;
            while (j >= 1 && idx[j] == H) --j;
            if (j < 1) break;
            ++idx[j];
            for (int m = j + 1; m < d; ++m) idx[m] = idx[j];
        }
        partial[first] = acc;
    });
    long double total = 0;
    for (long double v : partial) total += v;
    return total / std::pow(static_cast<long double>(M), d);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument, "slope needs two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
    mx /= x.size(), my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

EnergyScaling energy_scaling_experiment(int d, int n, const std::vector<i64>& N_list, ShellCache* cache,
                                        const sparse::ConvLimits& limits) {
    require(!N_list.empty(), ErrorCode::InvalidArgument, "empty N list");
    EnergyScaling out;
    out.d = d;
    out.n = n;
    out.target_exponent = exponent_target(d, n);
    for (i64 N : N_list) {
        const Shell shell = cache ? cache->get(d, N * N) : enumerate_shell(d, N * N);
        EnergyRow row;
        row.N = N;
        row.count = shell.count();
        try {
            const auto rep = energy_report(shell, n, limits);
            row.exact = true;
            row.energy_exact = rep.energy;
            row.energy = rep.energy.convert_to<long double>();
            row.sumset_size = rep.sumset_size;
            row.cs_floor = rep.cs_floor;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ScaleExceeded) throw;
            row.energy = energy_nyquist(shell, N, n);
        }
        const long double scale = std::pow(static_cast<long double>(N), out.target_exponent);
        row.ratio = static_cast<double>(row.energy / scale);
        row.cs_ratio = row.exact ? static_cast<double>(row.cs_floor.convert_to<long double>() / scale) : 0.0;
        out.rows.push_back(std::move(row));
    }
    std::vector<double> xs, ys;
    const i64 smallest = *std::min_element(N_list.begin(), N_list.end());
    for (const auto& r : out.rows) {
        if (out.rows.size() >= 3 && r.N == smallest) continue;
        if (r.energy <= 0) continue;
        xs.push_back(static_cast<double>(r.N));
        ys.push_back(static_cast<double>(r.energy));
    }
    out.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    return out;
}

void write_energy_csv(std::ostream& out, const EnergyScaling& rep) {
    out << "d,lambda,n,count,energy,sumset_size,cs_floor,ratio_to_power_law\n";
    for (const auto& r : rep.rows) {
        out << rep.d << ',' << r.N * r.N << ',' << rep.n << ',' << r.count << ',';
        if (r.exact) {
            out << r.energy_exact << ',' << r.sumset_size << ',' << r.cs_floor;
        } else {
            out.precision(17);
            out << static_cast<double>(r.energy) << ",,";
        }
        out.precision(10);
        out << ',' << r.ratio << '\n';
    }
}

}  // namespace trl
