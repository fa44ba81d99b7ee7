#include "trl/kernel.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "trl/error.hpp"
#include "trl/parallel.hpp"
#include "trl/sequence.hpp"

namespace trl {

namespace {

constexpr int kMinPanels = 64;

void check_point(const KernelSpec& spec, std::span<const double> x) {
    require(static_cast<int>(x.size()) == spec.d, ErrorCode::InvalidArgument,
            "point has " + std::to_string(x.size()) + " coordinates, expected " + std::to_string(spec.d));
}

// e(k x_j) for k in [-R, R], one row per coordinate.
std::vector<std::vector<cplx>> phase_tables(std::span<const double> x, i64 R) {
    std::vector<std::vector<cplx>> tab(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        tab[j].resize(static_cast<std::size_t>(2 * R + 1));
        for (i64 k = -R; k <= R; ++k) {
            tab[j][static_cast<std::size_t>(k + R)] = expi2pi(static_cast<double>(
                static_cast<long double>(k) * x[j] - std::floor(static_cast<long double>(k) * x[j])));
        }
    }
    return tab;
}

// Largest |frequency| of prod_j G(t, x_j) e(-lambda t) in t.
double max_t_frequency(const KernelSpec& spec) {
    const double top = static_cast<double>(spec.d) * std::pow(2.0 * static_cast<double>(spec.N) - 1.0, 2);
    const double lam = static_cast<double>(spec.lambda);
    return std::max(lam, top - lam);
}

// int_{-h}^{h} prod_j G(a/q + tau, x_j) e(-lambda (a/q + tau)) w(tau) dtau
QuadResult arc_integral(const KernelSpec& spec, const Propagator& G, std::span<const double> x, i64 a, i64 q,
                        double h, const std::function<double(double)>& weight) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    const cplx phase0 = unit_root(-mulmod(spec.lambda, a, q), q);
    const long double centre = static_cast<long double>(a) / static_cast<long double>(q);
    auto integrand = [&](double tau) -> cplx {
        const double w = weight(tau);
        if (w == 0.0) return 0.0;
        const double t = static_cast<double>(centre + tau);
        cplx prod = phase0 * expi2pi(-static_cast<double>(spec.lambda) * tau) * w;
        for (double xj : x) prod *= G(t, xj);
        return prod;
    };
    const auto panels = std::max<i64>(kMinPanels, static_cast<i64>(std::ceil(2.0 * h * max_t_frequency(spec))));
    const double step = 2.0 * h / static_cast<double>(panels);
    QuadResult r;
    for (i64 p = 0; p < panels; ++p) {
        const double lo = -h + static_cast<double>(p) * step;
        const double hi = p + 1 == panels ? h : lo + step;
        double err = 0.0;
        r.value += GK::integrate(integrand, lo, hi, 0, 0.0, &err);
        r.err += err;
    }
    return r;
}

struct Arc {
    i64 a, q;
};

QuadResult sum_arcs(const KernelSpec& spec, std::span<const double> x, const std::vector<Arc>& arcs, double h,
                    const std::function<double(double)>& weight, double scale) {
    const Propagator G(spec.N);
    std::vector<QuadResult> parts(arcs.size());
    parallel_for(arcs.size(), [&](std::size_t i) {
        parts[i] = arc_integral(spec, G, x, arcs[i].a, arcs[i].q, h, weight);
    });
    QuadResult total;
    for (const auto& p : parts) {
        total.value += p.value;
        total.err += p.err;
    }
    total.value *= scale;
    total.err *= std::abs(scale);
    return total;
}

bool is_power_of_two(i64 v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

KernelSpec make_kernel_spec(int d, i64 N, ShellCache* cache) {
    require(N >= 1, ErrorCode::InvalidArgument, "kernel: N must be >= 1");
    Shell shell = cache ? cache->get(d, N * N) : enumerate_shell(d, N * N);
    return make_kernel_spec(std::move(shell), N);
}

KernelSpec make_kernel_spec(Shell shell, i64 N) {
    require(shell.lambda == N * N, ErrorCode::InvalidArgument, "kernel: shell lambda must equal N^2");
    KernelSpec spec;
    spec.d = shell.d;
    spec.N = N;
    spec.lambda = shell.lambda;
    spec.shell = std::move(shell);
    return spec;
}

cplx kernel_direct_complex(const KernelSpec& spec, std::span<const double> x) {
    check_point(spec, x);
    const auto tab = phase_tables(x, spec.N);
    const std::size_t count = spec.shell.count();
    cplx acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto k = spec.shell.point(i);
        cplx z = tab[0][static_cast<std::size_t>(k[0] + spec.N)];
        for (int j = 1; j < spec.d; ++j) {
            z *= tab[static_cast<std::size_t>(j)][static_cast<std::size_t>(k[static_cast<std::size_t>(j)] + spec.N)];
        }
        acc += z;
    }
    return acc;
}

double kernel_direct(const KernelSpec& spec, std::span<const double> x) { return kernel_direct_complex(spec, x).real(); }

i64 nyquist_samples(int d, i64 N) { return 2 * d * (2 * N) * (2 * N) + 1; }

double kernel_t_integral(const KernelSpec& spec, std::span<const double> x, i64 M) {
    check_point(spec, x);
    require(M >= nyquist_samples(spec.d, spec.N), ErrorCode::NyquistViolation,
            "kernel_t_integral: M = " + std::to_string(M) + " below " + std::to_string(nyquist_samples(spec.d, spec.N)));
    const i64 R = 2 * spec.N;
    const RootTable roots(M);
    const auto tab = phase_tables(x, R);
    std::vector<double> weight(static_cast<std::size_t>(2 * R + 1));
    std::vector<i64> k2(static_cast<std::size_t>(2 * R + 1));
    for (i64 k = -R; k <= R; ++k) {
        weight[static_cast<std::size_t>(k + R)] = gamma_cutoff(static_cast<double>(k) / static_cast<double>(spec.N));
        k2[static_cast<std::size_t>(k + R)] = mod(k * k, M);
    }
    const i64 lam = mod(spec.lambda, M);
    const std::size_t blocks = std::min<std::size_t>(64, static_cast<std::size_t>(M));
    std::vector<cplx> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        const i64 lo = M * static_cast<i64>(b) / static_cast<i64>(blocks);
        const i64 hi = M * static_cast<i64>(b + 1) / static_cast<i64>(blocks);
        cplx acc = 0.0;
        for (i64 i = lo; i < hi; ++i) {
            cplx prod = roots(mod(-mulmod(lam, i, M), M));
            for (int j = 0; j < spec.d; ++j) {
                cplx g = 0.0;
                const auto& row = tab[static_cast<std::size_t>(j)];
                for (std::size_t kk = 0; kk < weight.size(); ++kk) {
                    if (weight[kk] == 0.0) continue;
                    g += weight[kk] * row[kk] * roots(static_cast<i64>((static_cast<i128>(k2[kk]) * i) % M));
                }
                prod *= g;
            }
            acc += prod;
        }
        partial[b] = acc;
    });
    cplx total = 0.0;
    for (const auto& p : partial) total += p;
    return total.real() / static_cast<double>(M);
}

i64 frequency_offset(const KernelSpec& spec, std::span<const std::int32_t> k) {
    i64 n = 0;
    for (auto c : k) n += static_cast<i64>(c) * c;
    return n - spec.lambda;
}

double gamma_product(const KernelSpec& spec, std::span<const std::int32_t> k) {
    double g = 1.0;
    for (auto c : k) {
        g *= gamma_cutoff(static_cast<double>(c) / static_cast<double>(spec.N));
        if (g == 0.0) break;
    }
    return g;
}

double k0_fourier(const KernelSpec& spec, std::span<const std::int32_t> k) {
    require(static_cast<int>(k.size()) == spec.d, ErrorCode::InvalidArgument, "k0_fourier: dimension mismatch");
    const double g = gamma_product(spec, k);
    if (g == 0.0) return 0.0;
    const double Nd = static_cast<double>(spec.N);
    return arc_bump().hat(static_cast<double>(frequency_offset(spec, k)) / Nd) / Nd * g;
}

QuadResult k0_eval(const KernelSpec& spec, std::span<const double> x) {
    check_point(spec, x);
    const double Nd = static_cast<double>(spec.N);
    const double h = arc_bump().support() / Nd;
    return sum_arcs(spec, x, {{0, 1}}, h, [Nd](double tau) { return arc_bump()(Nd * tau); }, 1.0);
}

ArcCutoffPrime ArcCutoffPrime::make(i64 Q, i64 N) {
    require(N >= 1 && Q >= N && Q <= N * N, ErrorCode::InvalidArgument,
            "prime arcs need N <= Q <= N^2 (Q = " + std::to_string(Q) + ", N = " + std::to_string(N) + ")");
    ArcCutoffPrime arcs;
    arcs.Q = Q;
    arcs.primes = primes_in(Q, 2 * Q);
    require(!arcs.primes.empty(), ErrorCode::EmptyArcSet, "no prime in [Q, 2Q] for Q = " + std::to_string(Q));
    for (i64 q : arcs.primes) arcs.arc_count += q - 1;
    const double Qd = static_cast<double>(Q);
    arcs.c_Q = Qd * Qd / (static_cast<double>(arcs.arc_count) * arc_bump().integral());
    return arcs;
}

QuadResult kQ_eval(const KernelSpec& spec, std::span<const double> x, const ArcCutoffPrime& arcs) {
    check_point(spec, x);
    std::vector<Arc> list;
    list.reserve(static_cast<std::size_t>(arcs.arc_count));
    for (i64 q : arcs.primes)
        for (i64 a = 1; a < q; ++a) list.push_back({a, q});
    const double Q2 = static_cast<double>(arcs.Q) * static_cast<double>(arcs.Q);
    return sum_arcs(spec, x, list, arcs.half_width(), [Q2](double tau) { return arc_bump()(Q2 * tau); }, arcs.c_Q);
}

double kerr_fourier(const KernelSpec& spec, std::span<const std::int32_t> k, const ArcCutoffPrime& arcs) {
    require(static_cast<int>(k.size()) == spec.d, ErrorCode::InvalidArgument, "kerr_fourier: dimension mismatch");
    const i64 l = frequency_offset(spec, k);
    if (l == 0) return 0.0;  // 1 - eta_Q has mean zero
    const double g = gamma_product(spec, k);
    if (g == 0.0) return 0.0;
    i64 ram = 0;
    for (i64 q : arcs.primes) ram += (l % q == 0) ? q - 1 : -1;
    const double Q2 = static_cast<double>(arcs.Q) * static_cast<double>(arcs.Q);
    return -arcs.c_Q / Q2 * arc_bump().hat(static_cast<double>(l) / Q2) * static_cast<double>(ram) * g;
}

ArcCutoffDyadic ArcCutoffDyadic::make(i64 Q, int s, i64 N) {
    require(Q >= 2 && is_power_of_two(Q), ErrorCode::InvalidArgument, "dyadic arcs: Q must be a power of two >= 2");
    require(s >= 1 && s < 62, ErrorCode::InvalidArgument, "dyadic arcs: bad s");
    const i64 two_s = i64(1) << s;
    require(Q < two_s && two_s < N, ErrorCode::InvalidArgument,
            "dyadic arcs need Q < 2^s < N (Q = " + std::to_string(Q) + ", 2^s = " + std::to_string(two_s) +
                ", N = " + std::to_string(N) + ")");
    ArcCutoffDyadic arcs;
    arcs.Q = Q;
    arcs.s = s;
    arcs.N = N;
    arcs.filled = 2 * two_s >= N;
    // neighbouring fractions with q, q' < 2Q are at least 1/(2Q-1)^2 apart
    const double gap = 1.0 / std::pow(2.0 * static_cast<double>(Q) - 1.0, 2);
    require(2.0 * arcs.half_width() < gap, ErrorCode::InvalidArgument, "dyadic arcs: supports would overlap");
    return arcs;
}

std::vector<ArcCutoffDyadic> dyadic_grid(i64 N) {
    std::vector<ArcCutoffDyadic> grid;
    for (i64 Q = 2; Q < N; Q *= 2) {
        for (int s = 1; (i64(1) << s) < N; ++s) {
            if ((i64(1) << s) <= Q) continue;
            try {
                grid.push_back(ArcCutoffDyadic::make(Q, s, N));
            } catch (const Error&) {
                // overlapping supports: (Q, s) not admissible at this N
            }
        }
    }
    return grid;
}

double kQs_fourier(const KernelSpec& spec, std::span<const std::int32_t> k, const ArcCutoffDyadic& arcs) {
    require(static_cast<int>(k.size()) == spec.d, ErrorCode::InvalidArgument, "kQs_fourier: dimension mismatch");
    const double g = gamma_product(spec, k);
    if (g == 0.0) return 0.0;
    const i64 l = frequency_offset(spec, k);
    i64 ram = 0;
    for (i64 q = arcs.Q; q < 2 * arcs.Q; ++q) ram += ramanujan_sum(q, l);
    const double scale = arcs.scale();
    return arcs.profile().hat(static_cast<double>(l) / scale) / scale * static_cast<double>(ram) * g;
}

QuadResult kQs_eval(const KernelSpec& spec, std::span<const double> x, const ArcCutoffDyadic& arcs) {
    check_point(spec, x);
    require(arcs.N == spec.N, ErrorCode::InvalidArgument, "kQs_eval: arcs built for a different N");
    std::vector<Arc> list;
    for (i64 q = arcs.Q; q < 2 * arcs.Q; ++q)
        for (i64 a = 1; a < q; ++a)
            if (gcd(a, q) == 1) list.push_back({a, q});
    const double scale = arcs.scale();
    const BumpProfile& eta = arcs.profile();
    return sum_arcs(spec, x, list, arcs.half_width(), [scale, &eta](double tau) { return eta(scale * tau); }, 1.0);
}

Decomposition kerr_eval(const KernelSpec& spec, std::span<const double> x, const std::vector<ArcCutoffDyadic>& grid) {
    Decomposition dec;
    dec.K = kernel_direct(spec, x);
    const auto k0 = k0_eval(spec, x);
    dec.K0 = k0.value;
    dec.quad_err = k0.err;
    for (const auto& arcs : grid) {
        const auto r = kQs_eval(spec, x, arcs);
        dec.KQs += r.value;
        dec.quad_err += r.err;
    }
    dec.Kerr = dec.K - dec.K0 - dec.KQs;
    return dec;
}

std::vector<cplx> kernel_on_grid(const KernelSpec& spec, i64 M) {
    require(M >= 1, ErrorCode::InvalidArgument, "kernel_on_grid: M must be >= 1");
    const auto d = static_cast<std::size_t>(spec.d);
    std::size_t total = 1;
    for (std::size_t j = 0; j < d; ++j) total *= static_cast<std::size_t>(M);
    require(total <= (std::size_t(1) << 26), ErrorCode::ScaleExceeded, "kernel_on_grid: grid too large");
    std::vector<cplx> out(total);
    parallel_for(total, [&](std::size_t idx) {
        std::vector<double> x(d);
        std::size_t rest = idx;
        for (std::size_t j = d; j-- > 0;) {
            x[j] = static_cast<double>(rest % static_cast<std::size_t>(M)) / static_cast<double>(M);
            rest /= static_cast<std::size_t>(M);
        }
        out[idx] = kernel_direct_complex(spec, x);
    });
    return out;
}

void grid_dft(std::vector<cplx>& values, int d, i64 M) {
    const auto m = static_cast<std::size_t>(M);
    const RootTable roots(M);
    std::size_t stride = 1;
    std::vector<cplx> line(m), tmp(m);
    for (int axis = d - 1; axis >= 0; --axis) {
        const std::size_t block = stride * m;
        for (std::size_t base = 0; base < values.size(); base += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                for (std::size_t i = 0; i < m; ++i) line[i] = values[base + off + i * stride];
                for (std::size_t k = 0; k < m; ++k) {
                    cplx acc = 0.0;
                    for (std::size_t i = 0; i < m; ++i) {
                        acc += line[i] * roots(static_cast<i64>((m - (k * i) % m) % m));
                    }
                    tmp[k] = acc / static_cast<double>(M);
                }
                for (std::size_t k = 0; k < m; ++k) values[base + off + k * stride] = tmp[k];
            }
        }
        stride *= m;
    }
}

double grid_parseval(const KernelSpec& spec) {
    require(spec.d <= 3, ErrorCode::ScaleExceeded, "grid_parseval: d <= 3 only");
    const i64 M = 2 * spec.N + 1;
    const auto values = kernel_on_grid(spec, M);
    long double acc = 0.0L;
    for (const auto& v : values) acc += std::norm(v);
    return static_cast<double>(acc / static_cast<long double>(values.size()));
}

std::string to_string(KernelPiece piece) {
    switch (piece) {
        case KernelPiece::K: return "K";
        case KernelPiece::K0: return "K0";
        case KernelPiece::KQ: return "KQ";
        case KernelPiece::KQs: return "KQs";
        case KernelPiece::Kerr: return "Kerr";
    }
    return "?";
}

std::vector<std::vector<double>> scan_points(int d, std::size_t points) {
    std::vector<std::vector<double>> out;
    out.reserve(points);
    const auto du = static_cast<std::size_t>(d);
    const std::size_t corners = d <= 6 ? (std::size_t(1) << d) : 64;
    for (std::size_t c = 0; c < corners && out.size() < points; ++c) {
        std::vector<double> x(du, 0.0);
        for (std::size_t j = 0; j < du && j < 6; ++j) x[j] = (c >> j) & 1 ? 0.5 : 0.0;
        out.push_back(std::move(x));
    }
    const KroneckerSequence seq(d);
    for (std::size_t i = 0; out.size() < points; ++i) {
        std::vector<double> x(du);
        seq.point(i, x.data());
        out.push_back(std::move(x));
    }
    return out;
}

double piece_bound(KernelPiece piece, int d, i64 N, i64 Q, int s) {
    const double Nd = static_cast<double>(N), Qd = static_cast<double>(Q);
    switch (piece) {
        case KernelPiece::K:
        case KernelPiece::K0: return std::pow(Nd, d - 2);
        case KernelPiece::KQ: return std::log(Qd) * Nd * Nd * std::pow(Qd, (d - 4) / 2.0);
        case KernelPiece::KQs: return std::pow(Nd * std::ldexp(1.0, s), d / 2.0 - 1.0) * std::pow(Qd, -(d - 4) / 2.0);
        case KernelPiece::Kerr: return std::pow(Nd, (d - 1) / 2.0);
    }
    return 1.0;
}

std::vector<ScanRow> kernel_sup_scan(const KernelSpec& spec, KernelPiece piece, i64 Q, int s, std::size_t points) {
    const auto xs = scan_points(spec.d, points);
    std::vector<ScanRow> rows(xs.size());
    ArcCutoffPrime prime_arcs;
    ArcCutoffDyadic dyadic_arcs;
    std::vector<ArcCutoffDyadic> grid;
    if (piece == KernelPiece::KQ) prime_arcs = ArcCutoffPrime::make(Q, spec.N);
    if (piece == KernelPiece::KQs) dyadic_arcs = ArcCutoffDyadic::make(Q, s, spec.N);
    if (piece == KernelPiece::Kerr) grid = dyadic_grid(spec.N);
    const double bound = piece_bound(piece, spec.d, spec.N, Q, s);
    parallel_for(xs.size(), [&](std::size_t i) {
        cplx v;
        switch (piece) {
            case KernelPiece::K: v = kernel_direct_complex(spec, xs[i]); break;
            case KernelPiece::K0: v = k0_eval(spec, xs[i]).value; break;
            case KernelPiece::KQ: v = kQ_eval(spec, xs[i], prime_arcs).value; break;
            case KernelPiece::KQs: v = kQs_eval(spec, xs[i], dyadic_arcs).value; break;
            case KernelPiece::Kerr: v = kerr_eval(spec, xs[i], grid).Kerr; break;
        }
        rows[i] = {piece, spec.d, spec.N, Q, s, i, v, bound, std::abs(v) / bound};
    });
    return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
    out << "piece,d,N,Q,s,x-index,value_re,value_im,bound,ratio\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << to_string(r.piece) << ',' << r.d << ',' << r.N << ',' << r.Q << ',' << r.s << ',' << r.x_index << ','
            << r.value.real() << ',' << r.value.imag() << ',' << r.bound << ',' << r.ratio << '\n';
    }
}

std::vector<FourierBoundRow> fourier_bounds_experiment(const KernelSpec& spec, const std::vector<i64>& Q_list,
                                                       std::size_t samples, std::uint64_t seed) {
    const int d = spec.d;
    const i64 R = 2 * spec.N;
    std::vector<std::int32_t> ks(spec.shell.coords.begin(), spec.shell.coords.end());
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<i64> U(-R, R);
    std::vector<std::int32_t> k(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < samples;) {
        for (auto& c : k) c = static_cast<std::int32_t>(U(rng));
        if (gamma_product(spec, k) == 0.0) continue;
        ks.insert(ks.end(), k.begin(), k.end());
        ++i;
    }
    const std::size_t n = ks.size() / static_cast<std::size_t>(d);
    auto scan = [&](FourierBoundRow row, auto&& coef) {
        row.samples = n;
        for (std::size_t i = 0; i < n; ++i) {
            const std::span<const std::int32_t> kk(ks.data() + i * d, static_cast<std::size_t>(d));
            const double v = std::abs(coef(kk));
            if (v > row.max_abs) {
                row.max_abs = v;
                row.argmax_l = frequency_offset(spec, kk);
            }
        }
        return row;
    };
    std::vector<FourierBoundRow> rows;
    for (i64 Q : Q_list) {
        const auto arcs = ArcCutoffPrime::make(Q, spec.N);
        FourierBoundRow row;
        row.piece = KernelPiece::Kerr;
        row.Q = Q;
        row = scan(row, [&](std::span<const std::int32_t> kk) { return kerr_fourier(spec, kk, arcs); });
        row.scaled = row.max_abs * static_cast<double>(Q) / std::log(static_cast<double>(Q));
        rows.push_back(row);
    }
    for (const auto& arcs : dyadic_grid(spec.N)) {
        FourierBoundRow row;
        row.piece = KernelPiece::KQs;
        row.Q = arcs.Q;
        row.s = arcs.s;
        row = scan(row, [&](std::span<const std::int32_t> kk) { return kQs_fourier(spec, kk, arcs); });
        row.ceiling = static_cast<double>(arcs.Q * arcs.Q) / arcs.scale() * arcs.profile().hat_max();
        row.scaled = row.max_abs / row.ceiling;
        rows.push_back(row);
    }
    return rows;
}

void write_fourier_csv(std::ostream& out, const KernelSpec& spec, const std::vector<FourierBoundRow>& rows) {
    out << "piece,d,N,Q,s,samples,max_abs,argmax_l,scaled,ceiling\n";
    out.precision(12);
    for (const auto& r : rows)
        out << to_string(r.piece) << ',' << spec.d << ',' << spec.N << ',' << r.Q << ',' << r.s << ',' << r.samples << ','
            << r.max_abs << ',' << r.argmax_l << ',' << r.scaled << ',' << r.ceiling << '\n';
}

}  // namespace trl
