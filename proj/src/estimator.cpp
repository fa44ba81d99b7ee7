#include "trl/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "trl/error.hpp"
#include "trl/parallel.hpp"
#include "trl/sequence.hpp"

namespace trl {

namespace {

std::mt19937_64 stream(u64 seed, u64 tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    return std::mt19937_64(seq);
}

i64 max_coord(const Shell& shell) {
    i64 r = 0;
    for (std::int32_t c : shell.coords) r = std::max<i64>(r, std::abs(static_cast<i64>(c)));
    return r;
}

// Evaluates F with per-axis tables; scratch is reused across calls.
class Evaluator {
public:
    explicit Evaluator(const Eigenfunction& f) : f_(f), d_(f.shell.d), R_(max_coord(f.shell)) {
        table_.resize(static_cast<std::size_t>(d_ * (2 * R_ + 1)));
    }
    cplx operator()(std::span<const double> x) {
        const i64 W = 2 * R_ + 1;
        for (int j = 0; j < d_; ++j) {
            cplx* row = &table_[static_cast<std::size_t>(j * W)];
            const cplx step = expi2pi(x[static_cast<std::size_t>(j)]);
            row[R_] = 1.0;
            // direct values every 16 steps keep the recurrence accurate
            for (i64 k = 1; k <= R_; ++k) {
                row[R_ + k] = (k % 16 == 0) ? expi2pi(static_cast<double>(std::fmod(static_cast<long double>(k) * x[static_cast<std::size_t>(j)], 1.0L)))
                                            : row[R_ + k - 1] * step;
                row[R_ - k] = std::conj(row[R_ + k]);
            }
        }
        cplx acc = 0.0;
        const std::size_t n = f_.shell.count();
        const std::int32_t* k = f_.shell.coords.data();
        for (std::size_t i = 0; i < n; ++i, k += d_) {
            cplx term = f_.coeffs[i];
            for (int j = 0; j < d_; ++j) term *= table_[static_cast<std::size_t>(j * W + R_ + k[j])];
            acc += term;
        }
        return acc;
    }

private:
    const Eigenfunction& f_;
    int d_;
    i64 R_;
    std::vector<cplx> table_;
};

struct Jackknife {
    double mean = 0, mean_err = 0, norm = 0, norm_err = 0;
};

// Leave-one-block-out jackknife of the mean of v and of mean^{1/p}.
Jackknife jackknife(std::span<const double> v, double p) {
    const std::size_t n = v.size();
    const std::size_t blocks = std::min<std::size_t>(kReplicates, n);
    std::vector<long double> sums(blocks, 0.0L);
    std::vector<std::size_t> sizes(blocks, 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
        for (std::size_t i = lo; i < hi; ++i) sums[b] += v[i];
        sizes[b] = hi - lo;
    }
    const long double total = std::accumulate(sums.begin(), sums.end(), 0.0L);
    Jackknife out;
    out.mean = static_cast<double>(total / n);
    out.norm = std::pow(out.mean, 1.0 / p);
    if (blocks < 2) return out;
    std::vector<double> loo(blocks), loo_norm(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        loo[b] = static_cast<double>((total - sums[b]) / static_cast<long double>(n - sizes[b]));
        loo_norm[b] = std::pow(loo[b], 1.0 / p);
    }
    auto spread = [&](const std::vector<double>& t) {
        const double m = std::accumulate(t.begin(), t.end(), 0.0) / blocks;
        double s = 0;
        for (double x : t) s += (x - m) * (x - m);
        return std::sqrt(s * (blocks - 1) / blocks);
    };
    out.mean_err = spread(loo);
    out.norm_err = spread(loo_norm);
    return out;
}

}  // namespace

std::string to_string(Model m) {
    switch (m) {
        case Model::Constant: return "constant";
        case Model::Rademacher: return "rademacher";
        case Model::Gaussian: return "gaussian";
        case Model::Custom: return "custom";
    }
    return "?";
}

Model parse_model(const std::string& name) {
    for (Model m : {Model::Constant, Model::Rademacher, Model::Gaussian, Model::Custom})
        if (to_string(m) == name) return m;
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
}

Eigenfunction make_eigenfunction(Shell shell, Model model, u64 seed) {
    require(shell.count() > 0, ErrorCode::EmptyShell, "shell has no points");
    require(model != Model::Custom, ErrorCode::InvalidArgument, "custom coefficients need make_custom_eigenfunction");
    const std::size_t n = shell.count();
    Eigenfunction f;
    f.model = model;
    f.seed = seed;
    f.coeffs.resize(n);
    const double c = 1.0 / std::sqrt(static_cast<double>(n));
    auto rng = stream(seed, static_cast<u64>(model));
    switch (model) {
        case Model::Constant:
            std::fill(f.coeffs.begin(), f.coeffs.end(), cplx(c));
            break;
        case Model::Rademacher:
            for (auto& a : f.coeffs) a = (rng() >> 63) ? c : -c;
            break;
        default: {
            std::normal_distribution<double> g;
            double norm2 = 0;
            for (auto& a : f.coeffs) {
                const double re = g(rng);
                const double im = g(rng);
                a = {re, im};
                norm2 += re * re + im * im;
            }
            const double s = 1.0 / std::sqrt(norm2);
            for (auto& a : f.coeffs) a *= s;
        }
    }
    f.shell = std::move(shell);
    return f;
}

Eigenfunction make_custom_eigenfunction(Shell shell, std::vector<cplx> coeffs) {
    require(shell.count() > 0, ErrorCode::EmptyShell, "shell has no points");
    require(coeffs.size() == shell.count(), ErrorCode::InvalidArgument, "one coefficient per shell point");
    long double norm2 = 0;
    for (const auto& a : coeffs) norm2 += std::norm(a);
    require(norm2 > 0, ErrorCode::InvalidArgument, "zero coefficient vector");
    const double s = static_cast<double>(1.0L / std::sqrt(norm2));
    for (auto& a : coeffs) a *= s;
    Eigenfunction f;
    f.shell = std::move(shell);
    f.coeffs = std::move(coeffs);
    f.model = Model::Custom;
    return f;
}

cplx evaluate_F(const Eigenfunction& f, std::span<const double> x) {
    require(static_cast<int>(x.size()) == f.shell.d, ErrorCode::InvalidArgument, "point dimension");
    Evaluator ev(f);
    return ev(x);
}

std::vector<double> sample_abs(const Eigenfunction& f, std::size_t samples, u64 seed) {
    const int d = f.shell.d;
    constexpr std::size_t blocks = kReplicates;
    std::vector<KroneckerSequence> seqs;
    for (std::size_t b = 0; b < blocks; ++b) {
        auto rng = stream(seed, 0x5348494654ull + b);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> shift(static_cast<std::size_t>(d));
        for (auto& v : shift) v = U(rng);
        seqs.emplace_back(d, shift);
    }
    std::vector<std::size_t> start(blocks);
    for (std::size_t b = 0; b < blocks; ++b) start[b] = samples * b / blocks;
    std::vector<double> out(samples);
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
        Evaluator ev(f);
        std::vector<double> x(static_cast<std::size_t>(d));
        for (std::size_t i = c * kChunk; i < std::min(samples, (c + 1) * kChunk); ++i) {
            const auto b = static_cast<std::size_t>(std::upper_bound(start.begin(), start.end(), i) - start.begin()) - 1;
            seqs[b].point(i - start[b], x.data());
            out[i] = std::abs(ev(x));
        }
    });
    return out;
}

NormEstimate lp_norm_from_samples(std::span<const double> abs_values, double p) {
    require(p >= 1.0 && std::isfinite(p), ErrorCode::InvalidArgument, "p must be finite and >= 1");
    require(abs_values.size() >= kReplicates, ErrorCode::InvalidArgument, "too few samples");
    std::vector<double> powered(abs_values.size());
    NormEstimate e;
    for (std::size_t i = 0; i < abs_values.size(); ++i) {
        powered[i] = std::pow(abs_values[i], p);
        e.sample_max = std::max(e.sample_max, abs_values[i]);
    }
    const Jackknife j = jackknife(powered, p);
    e.estimate = j.norm;
    e.std_error = j.norm_err;
    e.power_mean = j.mean;
    e.power_error = j.mean_err;
    e.samples = abs_values.size();
    return e;
}

NormEstimate lp_norm_mc(const Eigenfunction& f, double p, std::size_t samples, u64 seed) {
    require(samples >= 1000, ErrorCode::InvalidArgument, "lp_norm_mc needs at least 1000 samples");
    const auto values = sample_abs(f, samples, seed);
    NormEstimate e = lp_norm_from_samples(values, p);
    for (const auto& a : f.coeffs) e.ceiling += std::abs(a);
    return e;
}

long double weighted_energy(const Shell& shell, std::span<const cplx> coeffs, int n, const sparse::ConvLimits& limits) {
    require(n >= 1, ErrorCode::InvalidArgument, "fold count must be >= 1");
    require(coeffs.size() == shell.count(), ErrorCode::InvalidArgument, "one coefficient per shell point");
    require(max_coord(shell) * 2 * n <= sparse::kCoordLimit, ErrorCode::ScaleExceeded, "coordinates too large");
    sparse::Vec<cplx> base;
    for (std::size_t i = 0; i < shell.count(); ++i) base.emplace_back(sparse::pack(shell.point(i)), coeffs[i]);
    sparse::normalize(base);
    auto mul = [](cplx a, cplx b) { return a * b; };
    std::function<sparse::Vec<cplx>(int)> power = [&](int m) -> sparse::Vec<cplx> {
        if (m == 1) return base;
        if (m % 2 == 0) {
            const auto half = power(m / 2);
            return sparse::convolve(half, half, limits, mul);
        }
        return sparse::convolve(power(m - 1), base, limits, mul);
    };
    long double total = 0;
    for (const auto& [k, b] : power(n)) total += static_cast<long double>(std::norm(b));
    return total;
}

EvenNorm lp_norm_even_exact(const Eigenfunction& f, int p, const sparse::ConvLimits& limits) {
    require(p >= 2 && p % 2 == 0, ErrorCode::InvalidArgument, "exact norms need an even p");
    const int n = p / 2;
    EvenNorm out;
    if (f.model == Model::Constant) {
        const long double count_n = std::pow(static_cast<long double>(f.shell.count()), n);
        const i64 N = isqrt(f.shell.lambda);
        const bool square = N * N == f.shell.lambda;
        // give up on the convolution once it would cost more than the grid
        sparse::ConvLimits capped = limits;
        if (square) capped.max_ops = std::min(limits.max_ops, std::max(1e6, energy_nyquist_cost(f.shell, N, n)));
        try {
            out.power = additive_energy(f.shell, n, capped).convert_to<long double>() / count_n;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ScaleExceeded || !square) throw;
            out.power = energy_nyquist(f.shell, N, n) / count_n;
            out.via_grid = true;
        }
    } else {
        out.power = weighted_energy(f.shell, f.coeffs, n, limits);
    }
    out.norm = static_cast<double>(std::pow(out.power, 1.0L / p));
    return out;
}

LevelSetEstimate level_set_measure(const Eigenfunction& f, double alpha, std::size_t samples, u64 seed) {
    require(alpha >= 0, ErrorCode::InvalidArgument, "alpha must be >= 0");
    require(samples >= 1, ErrorCode::InvalidArgument, "need samples");
    const auto values = sample_abs(f, samples, seed);
    const double a[] = {alpha};
    return level_set_sweep(values, a).front();
}

std::vector<LevelSetEstimate> level_set_sweep(std::span<const double> abs_values, std::span<const double> alphas) {
    std::vector<double> sorted(abs_values.begin(), abs_values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<LevelSetEstimate> out;
    for (double alpha : alphas) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), alpha);
        LevelSetEstimate e;
        e.alpha = alpha;
        e.samples = sorted.size();
        e.measure = static_cast<double>(above) / n;
        e.std_error = std::sqrt(e.measure * (1 - e.measure) / n);
        out.push_back(e);
    }
    return out;
}

double conjecture_rhs(int d, double p, i64 N) {
    require(d >= 2 && p >= 2, ErrorCode::InvalidArgument, "conjecture_rhs needs d >= 2, p >= 2");
    return std::pow(static_cast<double>(N), (d - 2) / 2.0 - d / p) + 1.0;
}

CriticalExponents critical_exponents(int d) {
    require(d > 4, ErrorCode::DimensionTooSmall, "2d/(d-4) needs d > 4, got d = " + std::to_string(d));
    return {2.0 * (d + 1) / (d - 1), 2.0 * d / (d - 2), 2.0 * d / (d - 3), 2.0 * d / (d - 4)};
}

RestrictionScaling restriction_scaling_experiment(int d, double p, const std::vector<i64>& N_list, Model model,
                                                  const RestrictionOptions& opt) {
    require(!N_list.empty(), ErrorCode::InvalidArgument, "empty N list");
    RestrictionScaling rep;
    rep.d = d;
    rep.p = p;
    rep.model = model;
    rep.seed = opt.seed;
    rep.samples = opt.samples;
    rep.target_slope = (d - 2) / 2.0 - d / p;
    const bool even = std::floor(p) == p && static_cast<long>(p) % 2 == 0;
    for (i64 N : N_list) {
        Shell shell = opt.cache ? opt.cache->get(d, N * N) : enumerate_shell(d, N * N);
        RestrictionRow row;
        row.N = N;
        row.count = shell.count();
        if (row.count == 0) continue;  // r_d(N^2) = 0 (only possible for d <= 2)
        const Eigenfunction f = make_eigenfunction(std::move(shell), model, opt.seed);
        row.mc = lp_norm_mc(f, p, opt.samples, opt.seed);
        if (even && opt.exact) {
            try {
                row.exact = lp_norm_even_exact(f, static_cast<int>(p), opt.limits);
                row.has_exact = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ScaleExceeded) throw;
            }
        }
        row.rhs = conjecture_rhs(d, p, N);
        row.ratio = (row.has_exact ? row.exact.norm : row.mc.estimate) / row.rhs;

        // focusing: |F|^p over the ball of radius 1/(10N) at the origin
        const double r = 0.1 / static_cast<double>(N);
        KroneckerSequence seq(d);
        std::vector<double> x(static_cast<std::size_t>(d));
        long double acc = 0;
        for (std::size_t i = 0; i < opt.focus_samples; ++i) {
            seq.point(i, x.data());
            double r2 = 0;
            for (auto& v : x) {
                v = (2 * v - 1) * r;
                r2 += v * v;
            }
            if (r2 >= r * r) continue;
            std::vector<double> y(x);
            for (auto& v : y) v = v < 0 ? v + 1 : v;
            acc += std::pow(std::abs(evaluate_F(f, y)), p);
        }
        const double integral = static_cast<double>(acc / opt.focus_samples) * std::pow(2 * r, d);
        row.focusing_ratio = integral / (std::pow(static_cast<double>(row.count), p / 2) * std::pow(static_cast<double>(N), -d));
        rep.rows.push_back(std::move(row));
    }
    rep.slope_from_exact = std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.has_exact; });
    std::vector<double> xs, ys;
    i64 smallest = rep.rows.empty() ? 0 : rep.rows.front().N;
    for (const auto& r : rep.rows) smallest = std::min(smallest, r.N);
    for (const auto& r : rep.rows) {
        if (rep.rows.size() >= 3 && r.N == smallest) continue;
        xs.push_back(static_cast<double>(r.N));
        ys.push_back(rep.slope_from_exact ? r.exact.norm : r.mc.estimate);
    }
    rep.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    return rep;
}

void write_restriction_csv(std::ostream& out, const RestrictionScaling& rep) {
    out << "d,N,p,model,seed,norm,std_error,rhs,ratio,norm_mc,exact,focusing_ratio\n";
    out.precision(12);
    for (const auto& r : rep.rows) {
        const double norm = r.has_exact ? r.exact.norm : r.mc.estimate;
        out << rep.d << ',' << r.N << ',' << rep.p << ',' << to_string(rep.model) << ',' << rep.seed << ',' << norm << ','
            << (r.has_exact ? 0.0 : r.mc.std_error) << ',' << r.rhs << ',' << r.ratio << ',' << r.mc.estimate << ','
            << (r.has_exact ? 1 : 0) << ',' << r.focusing_ratio << '\n';
    }
}

std::string restriction_summary_json(const RestrictionScaling& rep) {
    nlohmann::json j;
    j["d"] = rep.d;
    j["p"] = rep.p;
    j["model"] = to_string(rep.model);
    j["seed"] = rep.seed;
    j["samples"] = rep.samples;
    j["target_slope"] = rep.target_slope;
    j["slope"] = rep.slope;
    j["slope_source"] = rep.slope_from_exact ? "exact" : "mc";
    double fmin = INFINITY, fmax = 0;
    for (const auto& r : rep.rows) {
        nlohmann::json row{{"N", r.N}, {"count", r.count}, {"norm_mc", r.mc.estimate}, {"std_error", r.mc.std_error},
                           {"rhs", r.rhs}, {"ratio", r.ratio}, {"focusing_ratio", r.focusing_ratio}};
        if (r.has_exact) row["norm_exact"] = r.exact.norm;
        j["rows"].push_back(row);
        fmin = std::min(fmin, r.focusing_ratio);
        fmax = std::max(fmax, r.focusing_ratio);
    }
    j["focusing_ratio_min"] = fmin;
    j["focusing_ratio_max"] = fmax;
    return j.dump(2);
}

}  // namespace trl
