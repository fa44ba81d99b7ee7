#include "trl/propagator.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "trl/error.hpp"
#include "trl/parallel.hpp"

namespace trl {

namespace {

long double frac(long double v) noexcept { return v - std::floor(v); }

cplx e_frac(long double f) noexcept {
    const long double ang = 2.0L * std::numbers::pi_v<long double> * (f - std::nearbyint(f));
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
}

}  // namespace

cplx propagator_G(double t, double x, i64 N) {
    require(N >= 1, ErrorCode::InvalidArgument, "propagator_G: N must be >= 1");
    const long double tl = t, xl = x;
    cplx acc = 0.0;
    for (i64 k = -2 * N; k <= 2 * N; ++k) {
        const double w = gamma_cutoff(static_cast<double>(k) / static_cast<double>(N));
        if (w == 0.0) continue;
        const long double k2 = static_cast<long double>(k) * k;
        acc += w * e_frac(frac(k2 * tl) + frac(static_cast<long double>(k) * xl));
    }
    return acc;
}

Propagator::Propagator(i64 N) : N_(N) {
    require(N >= 1, ErrorCode::InvalidArgument, "Propagator: N must be >= 1");
    weights_.resize(static_cast<std::size_t>(4 * N + 1));
    for (i64 k = -2 * N; k <= 2 * N; ++k) {
        weights_[static_cast<std::size_t>(k + 2 * N)] = gamma_cutoff(static_cast<double>(k) / static_cast<double>(N));
    }
    for (double w : weights_) mass_ += w;
}

cplx Propagator::operator()(double t, double x) const noexcept {
    // z_k = e(k x + k^2 t), z_{k+1} = z_k r_k, r_{k+1} = r_k e(2t); exact
    // re-anchoring every kAnchor steps keeps the drift at a few ulps.
    constexpr i64 kAnchor = 16;
    const long double tl = t, xl = x;
    const cplx step = e_frac(frac(2.0L * tl));
    const i64 lo = -2 * N_ + 1;  // gamma vanishes at |k| = 2N
    cplx acc = 0.0;
    cplx z, r;
    for (i64 k = lo; k < 2 * N_; ++k) {
        if ((k - lo) % kAnchor == 0) {
            const long double kl = static_cast<long double>(k);
            z = e_frac(frac(kl * kl * tl) + frac(kl * xl));
            r = e_frac(frac(xl) + frac((2.0L * kl + 1.0L) * tl));
        } else {
            z *= r;
            r *= step;
        }
        acc += weights_[static_cast<std::size_t>(k + 2 * N_)] * z;
    }
    return acc;
}

cplx oscillatory_J(double x, double phi, i64 m, i64 q, i64 N) {
    require(q >= 1 && N >= 1, ErrorCode::InvalidArgument, "oscillatory_J: need q >= 1, N >= 1");
    const long double beta_l = static_cast<long double>(x) + static_cast<long double>(m) / q;
    const double beta = static_cast<double>(beta_l);
    const double Nd = static_cast<double>(N);
    const double freq = 4.0 * std::abs(beta) + 16.0 * std::abs(phi) * Nd;
    const double width = std::min(freq > 0.0 ? 1.0 / freq : Nd / 8.0, Nd / 8.0);
    const auto panels = static_cast<i64>(std::ceil(4.0 * Nd / width));
    const double step = 4.0 * Nd / static_cast<double>(panels);
    const double tol = 1e-9 * Nd;

    auto integrand = [&](double y) -> cplx {
        const double g = gamma_cutoff(y / Nd);
        if (g == 0.0) return 0.0;
        const long double yl = y;
        return g * e_frac(frac(beta_l * yl) + frac(static_cast<long double>(phi) * yl * yl));
    };

    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    // Fixed panels, each bisected only while its Kronrod-Gauss difference
    // exceeds its share of the tolerance.
    cplx total = 0.0;
    double err_total = 0.0;
    const double share = tol / (4.0 * Nd);  // tolerance per unit length
    auto panel = [&](auto&& self, double a, double b, int depth) -> void {
        double err = 0.0;
        const cplx v = GK::integrate(integrand, a, b, 0, 0.0, &err);
        if (err <= 0.25 * share * (b - a) || depth >= 12) {
            total += v;
            err_total += err;
            return;
        }
        const double mid = 0.5 * (a + b);
        self(self, a, mid, depth + 1);
        self(self, mid, b, depth + 1);
    };
    for (i64 p = 0; p < panels; ++p) {
        const double a = -2.0 * Nd + static_cast<double>(p) * step;
        const double b = p + 1 == panels ? 2.0 * Nd : a + step;
        // the cutoff vanishes identically on the outermost sliver only
        panel(panel, a, b, 0);
    }
    if (!(err_total <= tol) || !std::isfinite(total.real()) || !std::isfinite(total.imag())) {
        throw Error(ErrorCode::QuadratureNonConvergence,
                    "oscillatory_J: error estimate " + std::to_string(err_total) + " exceeds " + std::to_string(tol));
    }
    return total;
}

i64 default_m_window(const RationalArc& arc, double x, i64 N) {
    (void)x;
    const double q = static_cast<double>(arc.q), Nd = static_cast<double>(N);
    const auto base = static_cast<i64>(8.0 * std::max(1.0, q / Nd) + 16.0);
    // frequencies |x + m/q| up to 4|phi|N carry a stationary point; beyond it
    // the cutoff's transform decays below 1e-10 after ~32/N
    const auto spread = static_cast<i64>(std::ceil(q * (4.0 * std::abs(arc.phi) * Nd + 32.0 / Nd))) + 2;
    return std::max(base, spread);
}

cplx poisson_decomposition(const RationalArc& arc, double x, i64 N, i64 m_window) {
    require(arc.q >= 1, ErrorCode::InvalidArgument, "poisson_decomposition: q must be >= 1");
    require(gcd(arc.a, arc.q) == 1, ErrorCode::NotCoprime, "poisson_decomposition: gcd(a, q) > 1");
    require(m_window >= 0, ErrorCode::InvalidArgument, "poisson_decomposition: negative window");
    const i64 m0 = std::llround(-x * static_cast<double>(arc.q));
    const std::size_t count = static_cast<std::size_t>(2 * m_window + 1);
    std::vector<cplx> terms(count);
    parallel_for(count, [&](std::size_t i) {
        const i64 m = m0 - m_window + static_cast<i64>(i);
        const cplx s = gauss_sum_reduced(arc.a, m, arc.q, GaussSign::Minus).value;
        terms[i] = s == cplx(0.0) ? cplx(0.0) : s * oscillatory_J(x, arc.phi, m, arc.q, N);
    });
    cplx acc = 0.0;
    for (const auto& v : terms) acc += v;
    return acc;
}

DispersiveReport dispersive_ratio_scan(i64 N, i64 t_samples, i64 x_samples, bool keep_rows) {
    require(N >= 8, ErrorCode::InvalidArgument, "dispersive_ratio_scan: N must be >= 8");
    require(t_samples >= 1 && x_samples >= 1, ErrorCode::InvalidArgument, "dispersive_ratio_scan: empty grid");
    const Propagator G(N);
    DispersiveReport rep;
    rep.N = N;
    rep.histogram.assign(33, 0);

    const std::size_t nt = static_cast<std::size_t>(t_samples + 1);
    struct Slot {
        double max_ratio = 0.0, t = 0.0, x = 0.0;
        bool ok = true;
        std::vector<std::size_t> hist = std::vector<std::size_t>(33, 0);
        std::vector<DispersiveRow> rows;
    };
    std::vector<Slot> slots(nt);
    parallel_for(nt, [&](std::size_t i) {
        Slot& s = slots[i];
        const double t = static_cast<double>(i) / static_cast<double>(t_samples);
        const RationalArc arc = dirichlet_approx(t, N);
        const double cap = arc.phi == 0.0 ? static_cast<double>(N)
                                          : std::min(static_cast<double>(N), 1.0 / std::sqrt(std::abs(arc.phi)));
        const double bound = cap / std::sqrt(static_cast<double>(arc.q));
        for (i64 j = 0; j < x_samples; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(x_samples);
            const double absG = std::abs(G(t, x));
            const double ratio = absG / bound;
            if (!std::isfinite(ratio) || !(ratio > 0.0)) s.ok = false;
            if (ratio > s.max_ratio) {
                s.max_ratio = ratio;
                s.t = t;
                s.x = x;
            }
            ++s.hist[std::min<std::size_t>(32, static_cast<std::size_t>(ratio / 0.25))];
            if (keep_rows) s.rows.push_back({t, x, arc.q, arc.a, arc.phi, absG, bound, ratio});
        }
    });
    for (auto& s : slots) {
        if (s.max_ratio > rep.max_ratio) {
            rep.max_ratio = s.max_ratio;
            rep.max_ratio_t = s.t;
            rep.max_ratio_x = s.x;
        }
        rep.all_finite_positive = rep.all_finite_positive && s.ok;
        for (std::size_t b = 0; b < rep.histogram.size(); ++b) rep.histogram[b] += s.hist[b];
        if (keep_rows) rep.rows.insert(rep.rows.end(), s.rows.begin(), s.rows.end());
    }

    // Large-denominator arcs: odd primes q in [N, 2N], |phi| <= 1/q^2.
    const auto primes = primes_in(N, 2 * N);
    std::vector<std::pair<double, i64>> prime_max(primes.size(), {0.0, 0});
    parallel_for(primes.size(), [&](std::size_t i) {
        const i64 q = primes[i];
        if (q % 2 == 0) return;
        const double q2 = static_cast<double>(q) * static_cast<double>(q);
        for (i64 a : {i64(1), i64(2), q / 3, q / 2, q - 1}) {
            if (a <= 0 || gcd(a, q) != 1) continue;
            for (double c : {0.0, 0.5, -0.5, 1.0, -1.0}) {
                const double t = static_cast<double>(a) / static_cast<double>(q) + c / q2;
                for (i64 j = 0; j < x_samples; ++j) {
                    const double x = static_cast<double>(j) / static_cast<double>(x_samples);
                    const double r = std::abs(G(t, x)) / std::sqrt(static_cast<double>(q));
                    if (r > prime_max[i].first) prime_max[i] = {r, q};
                }
            }
        }
    });
    for (const auto& [r, q] : prime_max) {
        if (r > rep.prime_arc_max) {
            rep.prime_arc_max = r;
            rep.prime_arc_q = q;
        }
    }
    return rep;
}

void write_dispersive_csv(std::ostream& out, const DispersiveReport& report) {
    out << "t,x,q,a,phi,absG,bound,ratio\n";
    out.precision(17);
    for (const auto& r : report.rows) {
        out << r.t << ',' << r.x << ',' << r.q << ',' << r.a << ',' << r.phi << ',' << r.absG << ',' << r.bound
            << ',' << r.ratio << '\n';
    }
}

}  // namespace trl
