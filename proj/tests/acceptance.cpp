// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "trl/arith.hpp"
#include "trl/energy.hpp"
#include "trl/estimator.hpp"
#include "trl/expsum.hpp"
#include "trl/kernel.hpp"
#include "trl/lattice.hpp"
#include "trl/propagator.hpp"

using namespace trl;
using boost::multiprecision::cpp_int;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Check = std::function<Outcome()>;

std::string fmt(double x, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

i64 random_unit(std::mt19937_64& rng, i64 q) {
    if (q == 1) return 0;
    for (;;) {
        const i64 a = 1 + static_cast<i64>(rng() % static_cast<u64>(q - 1));
        if (gcd(a, q) == 1) return a;
    }
}

// t = M 2^{-E} exactly, E >= 0 (t in [0, 1]).
std::pair<cpp_int, int> dyadic(double t) {
    int e = 0;
    const double mant = std::frexp(t, &e);
    cpp_int M(static_cast<i64>(std::ldexp(mant, 53)));
    int E = 53 - e;
    while (E > 0 && M % 2 == 0) {
        M /= 2;
        --E;
    }
    return {M, E};
}

// |t - a/q| <= 1/(N q)  <=>  |M q - a 2^E| N <= 2^E
bool exact_within(const std::pair<cpp_int, int>& t, i64 a, i64 q, i64 N) {
    const cpp_int pow2 = cpp_int(1) << t.second;
    cpp_int diff = t.first * q - cpp_int(a) * pow2;
    if (diff < 0) diff = -diff;
    return diff * N <= pow2;
}

// ---- criteria ----

Outcome c1_gauss_magnitude() {
    std::mt19937_64 rng(101);
    double worst = 0;
    for (i64 q = 3; q <= 2001; q += 2)
        for (int i = 0; i < 20; ++i) {
            const i64 a = random_unit(rng, q), m = static_cast<i64>(rng() % static_cast<u64>(q));
            worst = std::max(worst, std::fabs(std::abs(gauss_sum_direct(a, m, q).value) * std::sqrt(double(q)) - 1));
        }
    return {worst <= 1e-6, "max | |S| sqrt(q) - 1 | = " + fmt(worst)};
}

Outcome c2_vanishing() {
    std::mt19937_64 rng(102);
    double worst = 0;
    for (i64 q = 4; q <= 2000; q += 4)
        for (int i = 0; i < 10; ++i) {
            const i64 a = random_unit(rng, q);
            const i64 m = 2 * static_cast<i64>(rng() % static_cast<u64>(q / 2)) + 1;
            worst = std::max(worst, std::abs(gauss_sum_direct(a, m, q).value));
        }
    return {worst <= 1e-9, "max |S| = " + fmt(worst)};
}

Outcome c3_multiplicativity() {
    std::mt19937_64 rng(103);
    double worst = 0;
    int done = 0;
    while (done < 500) {
        const i64 q1 = 2 + static_cast<i64>(rng() % 4999), q2 = 2 + static_cast<i64>(rng() % 4999);
        if (gcd(q1, q2) != 1) continue;
        const i64 q = q1 * q2;
        const i64 a = random_unit(rng, q), m = static_cast<i64>(rng() % static_cast<u64>(q));
        const cplx lhs = gauss_sum_direct(a, m, q).value;
        const cplx rhs = gauss_sum_direct(mulmod(a, q2, q1), m, q1).value * gauss_sum_direct(mulmod(a, q1, q2), m, q2).value;
        worst = std::max(worst, std::abs(lhs - rhs));
        ++done;
    }
    return {worst <= 1e-8, "500 pairs, max |S(q1 q2) - S S| = " + fmt(worst)};
}

Outcome c4_singular_series() {
    std::mt19937_64 rng(104);
    double worst = 0;
    for (i64 q = 3; q <= 99; q += 2)
        for (int d = 2; d <= 6; ++d)
            for (int i = 0; i < 10; ++i) {
                SingularSeriesParams P;
                P.q = q;
                P.lambda = static_cast<i64>(rng() % 10000);
                for (int j = 0; j < d; ++j) P.m.push_back(static_cast<i64>(rng() % 201) - 100);
                const cplx direct = singular_series(P).value, reduced = singular_series_reduced(P).value;
                // relative to |direct|, floored at q^{-d/2} (a single term's size) where the sum cancels
                const double scale = std::max(std::abs(direct), std::pow(double(q), -d / 2.0));
                worst = std::max(worst, std::abs(direct - reduced) / scale);
            }
    return {worst <= 1e-8, "max relative deviation = " + fmt(worst)};
}

Outcome c5_weil() {
    std::mt19937_64 rng(105);
    double worst = 0;
    for (i64 p : primes_in(2, 2000))
        for (int i = 0; i < 20; ++i) {
            i64 al = 0, be = 0;
            do {
                al = static_cast<i64>(rng() % static_cast<u64>(p));
                be = static_cast<i64>(rng() % static_cast<u64>(p));
            } while (al == 0 && be == 0);
            const double cap = 2 * std::sqrt(double(p));
            const auto kl = kloosterman(al, be, p);
            worst = std::max(worst, (std::abs(kl.value) - kl.err_bound) / cap);
            if (p > 2) {
                const auto sa = salie(al, be, p);
                worst = std::max(worst, (std::abs(sa.value) - sa.err_bound) / cap);
            }
        }
    return {worst <= 1.0, "max |sum| / (2 sqrt p) = " + fmt(worst, 8)};
}

Outcome c6_poisson() {
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> U(0, 1);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const i64 N = 4 + static_cast<i64>(rng() % 61);
        const i64 q = 1 + static_cast<i64>(rng() % 50);
        const i64 a = random_unit(rng, q);
        const double phi = (2 * U(rng) - 1) / double(N * q);
        const double x = U(rng);
        const RationalArc arc{a, q, phi};
        const cplx direct = propagator_G(double(a) / double(q) + phi, x, N);
        const cplx poisson = poisson_decomposition(arc, x, N, default_m_window(arc, x, N));
        worst = std::max(worst, std::abs(direct - poisson) / std::abs(direct));
    }
    return {worst <= 1e-6, "max |G - sum S J| / |G| = " + fmt(worst)};
}

Outcome c7_t_integral() {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> U(0, 1);
    double worst = 0;
    for (int d = 1; d <= 3; ++d)
        for (i64 N = 1; N <= 12; ++N) {
            const auto spec = make_kernel_spec(d, N);
            const i64 M = nyquist_samples(d, N);
            for (int i = 0; i < 20; ++i) {
                std::vector<double> x(static_cast<std::size_t>(d));
                for (auto& v : x) v = U(rng);
                const double dev = std::fabs(kernel_t_integral(spec, x, M) - kernel_direct(spec, x));
                worst = std::max(worst, dev / std::max<double>(1.0, double(spec.shell.count())));
            }
        }
    return {worst <= 1e-8, "max |integral - direct| / count = " + fmt(worst)};
}

// d = 5, N = 32 shell and its Fourier bound rows are shared by 8 and 9.
const std::map<i64, std::vector<FourierBoundRow>>& fourier_rows() {
    static const auto rows = [] {
        std::map<i64, std::vector<FourierBoundRow>> out;
        for (i64 N : {16, 32}) {
            const auto spec = make_kernel_spec(5, N);
            out[N] = fourier_bounds_experiment(spec, {N, 2 * N, 4 * N}, 20000, 8);
        }
        return out;
    }();
    return rows;
}

Outcome c8_kerr() {
    double on_shell = 0;
    for (i64 N : {16, 32}) {
        const auto spec = make_kernel_spec(5, N);
        for (i64 Q : {N, 2 * N, 4 * N}) {
            const auto arcs = ArcCutoffPrime::make(Q, N);
            for (std::size_t i = 0; i < spec.shell.count(); ++i)
                on_shell = std::max(on_shell, std::fabs(kerr_fourier(spec, spec.shell.point(i), arcs)));
        }
    }
    bool ok = on_shell <= 1e-9;
    std::string detail = "max |coef| on shell = " + fmt(on_shell);
    for (const auto& [N, rows] : fourier_rows()) {
        double lo = INFINITY, hi = 0;
        for (const auto& r : rows)
            if (r.piece == KernelPiece::Kerr) {
                lo = std::min(lo, r.scaled);
                hi = std::max(hi, r.scaled);
            }
        ok = ok && hi / lo < 2;
        detail += "; N=" + std::to_string(N) + " variation " + fmt(hi / lo);
    }
    return {ok, detail};
}

Outcome c9_kqs() {
    double worst = 0;
    std::size_t rows = 0;
    for (const auto& r : fourier_rows().at(32))
        if (r.piece == KernelPiece::KQs) {
            worst = std::max(worst, r.scaled);
            ++rows;
        }
    return {rows > 0 && worst <= 1.0, std::to_string(rows) + " (Q,s) levels, max |coef| / ceiling = " + fmt(worst)};
}

// Instances for 10 and 11.
std::vector<Shell> energy_instances() {
    std::vector<Shell> out;
    for (int d : {2, 3, 5})
        for (i64 lambda = 0; lambda <= (d <= 3 ? 25 : 9); ++lambda) {
            Shell s = enumerate_shell(d, lambda);
            if (s.count() > 0) out.push_back(std::move(s));
        }
    return out;
}

Outcome c10_energy() {
    std::size_t instances = 0, mismatches = 0;
    std::string first;
    for (const Shell& s : energy_instances()) {
        const BigInt E = additive_energy(s, 2);
        const BigInt brute = additive_energy_bruteforce(s.d, s.coords, 2);
        const auto f = make_eigenfunction(s, Model::Constant);
        const long double c2 = static_cast<long double>(s.count()) * static_cast<long double>(s.count());
        const long double power = lp_norm_even_exact(f, 4).power * c2;
        const std::vector<cplx> ones(s.count(), 1.0);
        const long double weighted = weighted_energy(s, ones, 2);
        const bool ok = E == brute && BigInt(std::llround(power)) == E && std::fabs(power - std::round(power)) < 1e-3L &&
                        weighted == E.convert_to<long double>();
        ++instances;
        if (!ok && mismatches++ == 0)
            first = " first mismatch d=" + std::to_string(s.d) + " lambda=" + std::to_string(s.lambda);
    }
    return {mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches" + first};
}

Outcome c11_cs_floor() {
    std::size_t instances = 0, violations = 0;
    auto check = [&](const Shell& s, int n) {
        const auto rep = energy_report(s, n);
        // independent floor: ceil(count^{2n} / #(nA))
        const cpp_int num = boost::multiprecision::pow(cpp_int(s.count()), 2 * n);
        const cpp_int floor_ = (num + rep.sumset_size - 1) / rep.sumset_size;
        ++instances;
        if (rep.energy < floor_ || rep.cs_floor != floor_) ++violations;
    };
    for (const Shell& s : energy_instances()) {
        check(s, 2);
        if (s.count() <= 200) check(s, 3);
    }
    for (i64 N = 2; N <= 6; ++N) check(enumerate_shell(4, N * N), 2);
    for (i64 N = 2; N <= 5; ++N) check(enumerate_shell(5, N * N), 2);
    return {violations == 0, std::to_string(instances) + " instances, " + std::to_string(violations) + " violations"};
}

Outcome c12_dispersive() {
    double lo = INFINITY, hi = 0, prime = 0;
    std::string detail;
    for (i64 N : {16, 32, 64}) {
        const auto rep = dispersive_ratio_scan(N, 4096, 64);
        lo = std::min(lo, rep.max_ratio);
        hi = std::max(hi, rep.max_ratio);
        prime = std::max(prime, rep.prime_arc_max);
        detail += "C*(" + std::to_string(N) + ")=" + fmt(rep.max_ratio) + " ";
    }
    detail += "variation " + fmt(hi / lo) + ", prime arcs max |G|/sqrt(q) = " + fmt(prime);
    return {hi / lo < 2 && prime <= hi, detail};
}

Outcome c13_dirichlet() {
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> U(0, 1);
    std::size_t bad = 0;
    std::string first;
    for (int i = 0; i < 10000; ++i) {
        const double t = U(rng);
        const i64 N = 2 + static_cast<i64>(rng() % 199);
        const auto arc = dirichlet_approx(t, N);
        const auto td = dyadic(t);
        // Farey oracle: every reduced a/q with 2 <= q <= N
        bool exists = false;
        for (i64 q = 2; q <= N && !exists; ++q) {
            const i64 a0 = static_cast<i64>(std::floor(t * double(q)));
            for (i64 a = std::max<i64>(0, a0 - 1); a <= std::min(q, a0 + 2); ++a)
                if (gcd(a, q) == 1 && exact_within(td, a, q, N)) {
                    exists = true;
                    break;
                }
        }
        const bool valid = arc.q >= 1 && arc.q <= N && gcd(arc.a, arc.q) == 1 && exact_within(td, arc.a, arc.q, N) &&
                           arc_within(t, arc.a, arc.q, N);
        const bool predicate = (arc.q >= 2) == exists;
        if (!(valid && predicate) && bad++ == 0)
            first = " first failure t=" + fmt(t, 17) + " N=" + std::to_string(N);
    }
    return {bad == 0, "10000 samples, " + std::to_string(bad) + " failures" + first};
}

Outcome c14_restriction() {
    RestrictionOptions opt;
    opt.samples = 4000;
    opt.focus_samples = 1000;
    const auto rep = restriction_scaling_experiment(5, 12, {3, 4, 5, 6, 7, 8}, Model::Constant, opt);
    const double target = 13.0 / 12.0;
    return {rep.slope_from_exact && std::fabs(rep.slope - target) <= 0.35,
            "slope " + fmt(rep.slope) + " (exact norms: " + (rep.slope_from_exact ? "yes" : "no") + "), target " + fmt(target)};
}

Outcome c15_parseval() {
    std::mt19937_64 rng(115);
    double worst_z = 0;
    std::string worst_at;
    std::size_t functions = 0;
    for (int d = 2; d <= 5; ++d)
        for (i64 N : {3, 4, 5}) {
            const Shell s = enumerate_shell(d, N * N);
            const std::size_t samples = std::max<std::size_t>(20000, 50 * s.count());
            for (Model m : {Model::Constant, Model::Rademacher, Model::Gaussian}) {
                const auto f = make_eigenfunction(s, m, rng());
                const auto e = lp_norm_mc(f, 2, samples, rng());
                const double z = (e.power_mean - 1) / e.power_error;
                if (std::fabs(z) > worst_z) {
                    worst_z = std::fabs(z);
                    worst_at = " (d=" + std::to_string(d) + " N=" + std::to_string(N) + " " + to_string(m) + ", z=" + fmt(z) + ")";
                }
                ++functions;
            }
        }
    double worst_grid = 0;
    for (int d = 1; d <= 3; ++d)
        for (i64 N = 1; N <= 12; ++N) {
            const auto spec = make_kernel_spec(d, N);
            if (spec.shell.count() == 0) continue;
            const double c = double(spec.shell.count());
            worst_grid = std::max(worst_grid, std::fabs(grid_parseval(spec) - c) / c);
        }
    return {worst_z <= 3 && worst_grid <= 1e-6, std::to_string(functions) + " eigenfunctions, max |z| = " + fmt(worst_z) + worst_at +
                                                     "; grid Parseval max relative deviation " + fmt(worst_grid)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, Check>> checks{
        {1, c1_gauss_magnitude}, {2, c2_vanishing},   {3, c3_multiplicativity}, {4, c4_singular_series},
        {5, c5_weil},            {6, c6_poisson},     {7, c7_t_integral},       {8, c8_kerr},
        {9, c9_kqs},             {10, c10_energy},    {11, c11_cs_floor},       {12, c12_dispersive},
        {13, c13_dirichlet},     {14, c14_restriction}, {15, c15_parseval},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& [id, check] : checks) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), sec);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
