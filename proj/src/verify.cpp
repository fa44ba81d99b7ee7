#include "trl/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

#include <boost/math/distributions/normal.hpp>

#include "trl/energy.hpp"
#include "trl/error.hpp"
#include "trl/estimator.hpp"
#include "trl/expsum.hpp"
#include "trl/kernel.hpp"
#include "trl/propagator.hpp"

namespace trl {

namespace {

// Records the first failure only; later checks still count.
struct Probe {
    Verdict& v;
    template <class Msg>
    void expect(bool ok, Msg&& msg) {
        ++v.checked;
        if (!ok && v.passed) {
            v.passed = false;
            v.counterexample = msg();
        }
    }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(15);
    os << x;
    return os.str();
}

using Body = std::function<void(Probe&, std::mt19937_64&, bool quick, bool fault)>;

struct Invariant {
    const char* name;
    Body body;
};

// ---- arith ----
const std::vector<Invariant>& arith_invariants() {
    static const std::vector<Invariant> list{
        {"ramanujan-sum-formula", [](Probe& pr, std::mt19937_64&, bool quick, bool fault) {
             const i64 top = quick ? 40 : 120;
             for (i64 q = 1; q <= top; ++q)
                 for (i64 l = -5; l <= 2 * q; ++l) {
                     cplx direct = 0;
                     for (i64 a = 1; a <= q; ++a)
                         if (gcd(a, q) == 1) direct += unit_root(mulmod(l, a, q), q);
                     const i64 c = fault ? -ramanujan_sum(q, l) : ramanujan_sum(q, l);
                     pr.expect(std::abs(direct - static_cast<double>(c)) < 1e-9, [&] {
                         return "q=" + std::to_string(q) + " l=" + std::to_string(l) + " formula=" + std::to_string(c) +
                                " direct=" + fmt(direct.real());
                     });
                 }
         }},
        {"mod-inverse", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             for (i64 q = 2; q <= (quick ? 200 : 1000); ++q)
                 for (i64 x = 1; x < q; ++x)
                     if (gcd(x, q) == 1) {
                         const i64 y = mod_inverse(x, q);
                         pr.expect(mulmod(x, y, q) == 1, [&] { return "x=" + std::to_string(x) + " q=" + std::to_string(q); });
                     }
         }},
        {"dirichlet-approximation", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             std::uniform_real_distribution<double> U(0, 1);
             for (int i = 0; i < (quick ? 1000 : 10000); ++i) {
                 const double t = U(rng);
                 const i64 N = 2 + static_cast<i64>(rng() % 199);
                 const auto arc = dirichlet_approx(t, N);
                 const bool ok = arc.q >= 1 && arc.q <= N && gcd(arc.a, arc.q) == 1 && arc_within(t, arc.a, arc.q, N);
                 pr.expect(ok, [&] {
                     return "t=" + fmt(t) + " N=" + std::to_string(N) + " a/q=" + std::to_string(arc.a) + "/" + std::to_string(arc.q);
                 });
             }
         }},
    };
    return list;
}

// ---- expsum ----
const std::vector<Invariant>& expsum_invariants() {
    static const std::vector<Invariant> list{
        {"gauss-multiplicativity", [](Probe& pr, std::mt19937_64& rng, bool quick, bool fault) {
             for (int i = 0; i < (quick ? 50 : 500); ++i) {
                 const i64 q1 = 2 + static_cast<i64>(rng() % (quick ? 300 : 2000));
                 const i64 q2 = 2 + static_cast<i64>(rng() % (quick ? 300 : 2000));
                 if (gcd(q1, q2) != 1) continue;
                 const i64 q = q1 * q2;
                 i64 a = 1 + static_cast<i64>(rng() % static_cast<u64>(q - 1));
                 while (gcd(a, q) != 1) ++a;
                 const i64 m = static_cast<i64>(rng() % static_cast<u64>(q));
                 const cplx lhs = gauss_sum_direct(a, m, q).value;
                 const cplx rhs = gauss_sum_direct(a * q2, fault ? -m + 1 : m, q1).value * gauss_sum_direct(a * q1, m, q2).value;
                 pr.expect(std::abs(lhs - rhs) <= 1e-8, [&] {
                     return "a=" + std::to_string(a) + " m=" + std::to_string(m) + " q1=" + std::to_string(q1) +
                            " q2=" + std::to_string(q2) + " |diff|=" + fmt(std::abs(lhs - rhs));
                 });
             }
         }},
        {"odd-modulus-magnitude", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             for (i64 q = 3; q <= (quick ? 301 : 2001); q += 2)
                 for (int i = 0; i < 5; ++i) {
                     i64 a = 1 + static_cast<i64>(rng() % static_cast<u64>(q - 1));
                     while (gcd(a, q) != 1) ++a;
                     const i64 m = static_cast<i64>(rng() % static_cast<u64>(q));
                     const double mag = std::abs(gauss_sum_reduced(a, m, q).value) * std::sqrt(static_cast<double>(q));
                     pr.expect(std::abs(mag - 1) <= 1e-6, [&] { return "q=" + std::to_string(q) + " |S| sqrt(q)=" + fmt(mag); });
                 }
         }},
        {"vanishing-4-divides-q", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             for (i64 q = 4; q <= (quick ? 400 : 2000); q += 4) {
                 i64 a = 1 + static_cast<i64>(rng() % static_cast<u64>(q - 1));
                 while (gcd(a, q) != 1) ++a;
                 const i64 m = 2 * static_cast<i64>(rng() % static_cast<u64>(q / 2)) + 1;
                 const double mag = std::abs(gauss_sum_direct(a, m, q).value);
                 pr.expect(mag <= 1e-9, [&] { return "q=" + std::to_string(q) + " m=" + std::to_string(m) + " |S|=" + fmt(mag); });
             }
         }},
        {"reduced-equals-direct", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             for (i64 q = 1; q <= (quick ? 60 : 200); ++q)
                 for (i64 a = 1; a <= q; ++a) {
                     if (gcd(a, q) != 1) continue;
                     for (i64 m = 0; m < std::min<i64>(q, 6); ++m) {
                         const auto d = gauss_sum_direct(a, m, q), r = gauss_sum_reduced(a, m, q);
                         pr.expect(std::abs(d.value - r.value) <= d.err_bound + r.err_bound + 1e-14, [&] {
                             return "a=" + std::to_string(a) + " m=" + std::to_string(m) + " q=" + std::to_string(q);
                         });
                     }
                 }
         }},
        {"weil-ceiling", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             for (i64 p : primes_in(3, quick ? 300 : 2000))
                 for (int i = 0; i < 5; ++i) {
                     const i64 al = static_cast<i64>(rng() % static_cast<u64>(p));
                     const i64 be = 1 + static_cast<i64>(rng() % static_cast<u64>(p - 1));
                     const double kl = std::abs(kloosterman(al, be, p).value), sa = std::abs(salie(al, be, p).value);
                     const double cap = 2 * std::sqrt(static_cast<double>(p)) + 1e-9;
                     pr.expect(kl <= cap && sa <= cap, [&] {
                         return "p=" + std::to_string(p) + " alpha=" + std::to_string(al) + " beta=" + std::to_string(be);
                     });
                 }
         }},
        {"singular-series-reduction", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             for (i64 q = 3; q <= (quick ? 31 : 99); q += 2)
                 for (int d = 2; d <= 6; ++d) {
                     SingularSeriesParams P;
                     P.q = q;
                     P.lambda = static_cast<i64>(rng() % 1000);
                     for (int j = 0; j < d; ++j) P.m.push_back(static_cast<i64>(rng() % 50) - 25);
                     const cplx a = singular_series(P).value, b = singular_series_reduced(P).value;
                     pr.expect(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)),
                               [&] { return "q=" + std::to_string(q) + " d=" + std::to_string(d); });
                 }
         }},
    };
    return list;
}

// ---- propagator ----
const std::vector<Invariant>& propagator_invariants() {
    static const std::vector<Invariant> list{
        {"poisson-decomposition", [](Probe& pr, std::mt19937_64& rng, bool quick, bool fault) {
             std::uniform_real_distribution<double> U(0, 1);
             for (int i = 0; i < (quick ? 3 : 20); ++i) {
                 const i64 N = 4 + static_cast<i64>(rng() % 28);
                 const auto arc = dirichlet_approx(U(rng), N);
                 const double t = static_cast<double>(arc.a) / arc.q + arc.phi;
                 const double x = U(rng);
                 const cplx direct = propagator_G(t, x, N);
                 cplx poisson = poisson_decomposition(arc, x, N, default_m_window(arc, x, N));
                 if (fault) poisson = std::conj(poisson) + 1.0;
                 const double rel = std::abs(direct - poisson) / std::max(1.0, std::abs(direct));
                 pr.expect(rel <= 1e-6, [&] {
                     return "N=" + std::to_string(N) + " a/q=" + std::to_string(arc.a) + "/" + std::to_string(arc.q) +
                            " x=" + fmt(x) + " rel=" + fmt(rel);
                 });
             }
         }},
        {"propagator-symmetries", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             std::uniform_real_distribution<double> U(0, 1);
             for (int i = 0; i < (quick ? 200 : 2000); ++i) {
                 const i64 N = 1 + static_cast<i64>(rng() % 64);
                 const double t = U(rng), x = U(rng);
                 const cplx g = propagator_G(t, x, N);
                 const bool ok = std::abs(g - propagator_G(t, 1 - x, N)) <= 1e-10 * N &&
                                 std::abs(std::conj(g) - propagator_G(1 - t, x, N)) <= 1e-10 * N &&
                                 std::abs(g) <= Propagator(N).mass() + 1e-9;
                 pr.expect(ok, [&] { return "N=" + std::to_string(N) + " t=" + fmt(t) + " x=" + fmt(x); });
             }
         }},
        {"prime-arc-ceiling", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             const i64 N = quick ? 16 : 32;
             const auto rep = dispersive_ratio_scan(N, quick ? 64 : 256, quick ? 8 : 16);
             pr.expect(rep.all_finite_positive && rep.prime_arc_max <= rep.max_ratio + 1e-12, [&] {
                 return "N=" + std::to_string(N) + " prime-arc max " + fmt(rep.prime_arc_max) + " > grid constant " + fmt(rep.max_ratio);
             });
         }},
    };
    return list;
}

// ---- kernel ----
const std::vector<Invariant>& kernel_invariants() {
    static const std::vector<Invariant> list{
        {"t-integral-identity", [](Probe& pr, std::mt19937_64& rng, bool quick, bool fault) {
             std::uniform_real_distribution<double> U(0, 1);
             for (int d = 1; d <= 3; ++d)
                 for (i64 N = 2; N <= (quick ? 6 : 12); N += (quick ? 4 : 2)) {
                     const auto spec = make_kernel_spec(d, N);
                     const double count = static_cast<double>(spec.shell.count());
                     for (int i = 0; i < (quick ? 2 : 5); ++i) {
                         std::vector<double> x(static_cast<std::size_t>(d));
                         for (auto& v : x) v = U(rng);
                         const double a = kernel_t_integral(spec, x, nyquist_samples(d, N));
                         const double b = fault ? -kernel_direct(spec, x) : kernel_direct(spec, x);
                         pr.expect(std::abs(a - b) <= 1e-8 * std::max(1.0, count), [&] {
                             return "d=" + std::to_string(d) + " N=" + std::to_string(N) + " x0=" + fmt(x[0]) +
                                    " integral=" + fmt(a) + " direct=" + fmt(b);
                         });
                     }
                 }
         }},
        {"kerr-vanishes-on-shell", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             const i64 N = quick ? 8 : 16;
             const auto spec = make_kernel_spec(5, N);
             for (i64 Q : {N, 2 * N, 4 * N}) {
                 const auto arcs = ArcCutoffPrime::make(Q, N);
                 for (std::size_t i = 0; i < spec.shell.count(); ++i) {
                     const double v = kerr_fourier(spec, spec.shell.point(i), arcs);
                     pr.expect(std::abs(v) <= 1e-9, [&] { return "Q=" + std::to_string(Q) + " point " + std::to_string(i); });
                 }
             }
         }},
        {"kqs-fourier-ceiling", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             const auto spec = make_kernel_spec(5, quick ? 16 : 32);
             const auto rows = fourier_bounds_experiment(spec, {}, quick ? 2000 : 20000, rng());
             for (const auto& r : rows)
                 pr.expect(r.max_abs <= r.ceiling * (1 + 1e-12), [&] {
                     return "Q=" + std::to_string(r.Q) + " s=" + std::to_string(r.s) + " max=" + fmt(r.max_abs);
                 });
         }},
        {"grid-parseval", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             for (int d = 1; d <= 3; ++d)
                 for (i64 N = 2; N <= (quick ? 4 : 8); ++N) {
                     const auto spec = make_kernel_spec(d, N);
                     const double c = static_cast<double>(spec.shell.count());
                     const double p = grid_parseval(spec);
                     pr.expect(std::abs(p - c) <= 1e-6 * std::max(1.0, c),
                               [&] { return "d=" + std::to_string(d) + " N=" + std::to_string(N) + " parseval=" + fmt(p); });
                 }
         }},
    };
    return list;
}

// ---- energy ----
const std::vector<Invariant>& energy_invariants() {
    static const std::vector<Invariant> list{
        {"convolution-equals-bruteforce", [](Probe& pr, std::mt19937_64&, bool quick, bool fault) {
             struct Inst { int d; i64 lmax; };
             for (const Inst in : {Inst{2, 25}, Inst{3, 25}, Inst{5, 9}}) {
                 for (i64 lambda = 1; lambda <= (quick ? std::min<i64>(in.lmax, 9) : in.lmax); ++lambda) {
                     const Shell s = enumerate_shell(in.d, lambda);
                     if (s.count() == 0) continue;
                     BigInt a = additive_energy(s, 2);
                     if (fault) a += 1;
                     const BigInt b = additive_energy_bruteforce(in.d, s.coords, 2);
                     pr.expect(a == b, [&] {
                         return "d=" + std::to_string(in.d) + " lambda=" + std::to_string(lambda) + " conv=" + a.str() + " brute=" + b.str();
                     });
                 }
             }
         }},
        {"cauchy-schwarz-floor", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             for (int d = 2; d <= 5; ++d)
                 for (i64 lambda = 1; lambda <= (quick ? 10 : 30); ++lambda)
                     for (int n = 1; n <= 3; ++n) {
                         const Shell s = enumerate_shell(d, lambda);
                         if (s.count() == 0 || std::pow(static_cast<double>(s.count()), n) > 1e7) continue;
                         const auto rep = energy_report(s, n);
                         pr.expect(rep.energy >= rep.cs_floor, [&] {
                             return "d=" + std::to_string(d) + " lambda=" + std::to_string(lambda) + " n=" + std::to_string(n);
                         });
                     }
         }},
        {"representation-mass-and-symmetry", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             for (int d = 1; d <= 4; ++d)
                 for (i64 lambda = 0; lambda <= (quick ? 10 : 25); ++lambda) {
                     const Shell s = enumerate_shell(d, lambda);
                     if (s.count() == 0) continue;
                     const auto rep = representation_counts(s, 2);
                     u64 mass = 0;
                     bool symmetric = true;
                     for (const auto& [k, c] : rep.counts) {
                         mass += c;
                         const auto it = std::lower_bound(rep.counts.begin(), rep.counts.end(), -k,
                                                          [](const auto& e, sparse::Key key) { return e.first < key; });
                         symmetric = symmetric && it != rep.counts.end() && it->first == -k && it->second == c;
                     }
                     pr.expect(mass == s.count() * s.count() && symmetric,
                               [&] { return "d=" + std::to_string(d) + " lambda=" + std::to_string(lambda); });
                 }
         }},
        {"energy-equals-even-norm", [](Probe& pr, std::mt19937_64&, bool quick, bool) {
             for (int d : {2, 3, 5})
                 for (i64 lambda = 1; lambda <= (quick ? 9 : (d == 5 ? 9 : 25)); ++lambda) {
                     const Shell s = enumerate_shell(d, lambda);
                     if (s.count() == 0) continue;
                     const std::vector<cplx> ones(s.count(), 1.0);
                     const long double w = weighted_energy(s, ones, 2);
                     const BigInt e = additive_energy(s, 2);
                     pr.expect(w == e.convert_to<long double>(),
                               [&] { return "d=" + std::to_string(d) + " lambda=" + std::to_string(lambda); });
                 }
         }},
    };
    return list;
}

// ---- estimator ----
const std::vector<Invariant>& estimator_invariants() {
    static const std::vector<Invariant> list{
        {"parseval-mc", [](Probe& pr, std::mt19937_64& rng, bool quick, bool fault) {
             // Each eigenfunction is a z-test. The threshold holds the family-wise false
             // alarm rate at that of one 3-sigma test (0.27%) over all of them.
             std::vector<std::pair<int, i64>> cases;
             for (int d = 2; d <= 5; ++d)
                 for (i64 N : {3, 5})
                     if (!(quick && N == 5 && d > 3)) cases.emplace_back(d, N);
             const double tests = 3.0 * static_cast<double>(cases.size());
             const double zmax = boost::math::quantile(boost::math::normal(), 1 - 0.0027 / (2 * tests));
             for (const auto& [d, N] : cases) {
                 const Shell s = enumerate_shell(d, N * N);
                 // the constant model puts its |F|^2 mass in 2^d peaks of volume ~1/count;
                 // the error estimate is only calibrated once samples >> count
                 const std::size_t samples = std::max<std::size_t>(quick ? 2000 : 8000, 50 * s.count());
                 for (Model m : {Model::Constant, Model::Rademacher, Model::Gaussian}) {
                     const auto f = make_eigenfunction(s, m, rng());
                     const auto e = lp_norm_mc(f, 2, samples, rng());
                     const double target = fault ? 1.5 : 1.0;
                     pr.expect(std::abs(e.power_mean - target) <= zmax * e.power_error, [&] {
                         return "d=" + std::to_string(d) + " N=" + std::to_string(N) + " model=" + to_string(m) +
                                " mean|F|^2=" + fmt(e.power_mean) + " se=" + fmt(e.power_error) + " z limit " + fmt(zmax);
                     });
                 }
             }
         }},
        {"unit-l2-coefficients", [](Probe& pr, std::mt19937_64& rng, bool, bool) {
             for (Model m : {Model::Constant, Model::Rademacher, Model::Gaussian}) {
                 const auto f = make_eigenfunction(enumerate_shell(4, 50), m, rng());
                 long double n2 = 0;
                 for (const auto& a : f.coeffs) n2 += std::norm(a);
                 pr.expect(std::fabs(n2 - 1) <= 1e-12L, [&] { return "model=" + to_string(m); });
             }
         }},
        {"even-norm-vs-mc", [](Probe& pr, std::mt19937_64& rng, bool quick, bool) {
             // each run is a 3-sigma check; a handful of misses is expected
             const auto f = make_eigenfunction(enumerate_shell(3, 9), Model::Constant);
             const int runs = quick ? 20 : 100;
             for (int p : {4, 6}) {
                 const double exact = lp_norm_even_exact(f, p).norm;
                 int covered = 0;
                 for (int i = 0; i < runs; ++i) {
                     const auto e = lp_norm_mc(f, p, 20000, rng());
                     covered += std::abs(e.estimate - exact) <= 3 * e.std_error;
                 }
                 pr.expect(covered >= (runs * 95 + 99) / 100 - (quick ? 1 : 0),
                           [&] { return "p=" + std::to_string(p) + " covered " + std::to_string(covered) + "/" + std::to_string(runs); });
             }
         }},
    };
    return list;
}

const std::vector<Invariant>& invariants_for(const std::string& suite) {
    if (suite == "arith") return arith_invariants();
    if (suite == "expsum") return expsum_invariants();
    if (suite == "propagator") return propagator_invariants();
    if (suite == "kernel") return kernel_invariants();
    if (suite == "energy") return energy_invariants();
    if (suite == "estimator") return estimator_invariants();
    throw Error(ErrorCode::InvalidArgument, "unknown suite '" + suite + "'");
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names{"arith", "expsum", "propagator", "kernel", "energy", "estimator"};
    return names;
}

std::vector<Verdict> run_verify(const std::string& suite, const VerifyOptions& opt) {
    std::vector<std::string> suites;
    if (suite == "all") {
        suites = verify_suite_names();
    } else {
        invariants_for(suite);  // validates the name
        suites.push_back(suite);
    }
    std::vector<Verdict> out;
    for (const auto& s : suites) {
        bool first = true;
        for (const auto& inv : invariants_for(s)) {
            Verdict v;
            v.suite = s;
            v.invariant = inv.name;
            std::mt19937_64 rng(opt.seed ^ std::hash<std::string>{}(s + "/" + inv.name));
            Probe pr{v};
            const auto t0 = std::chrono::steady_clock::now();
            try {
                inv.body(pr, rng, opt.quick, first && opt.inject_fault == s);
            } catch (const Error& e) {
                v.passed = false;
                v.counterexample = std::string("exception: ") + e.what();
            }
            v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.push_back(std::move(v));
            first = false;
        }
    }
    return out;
}

std::string verdicts_json(const std::vector<Verdict>& verdicts) {
    nlohmann::json j;
    j["verdicts"] = nlohmann::json::array();
    bool all = true;
    for (const auto& v : verdicts) {
        nlohmann::json e{{"suite", v.suite}, {"invariant", v.invariant}, {"passed", v.passed}, {"checked", v.checked},
                         {"seconds", v.seconds}};
        if (!v.passed) e["counterexample"] = v.counterexample;
        j["verdicts"].push_back(e);
        all = all && v.passed;
    }
    j["passed"] = all;
    return j.dump(2);
}

}  // namespace trl
