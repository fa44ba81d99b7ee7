#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "trl/bump.hpp"
#include "trl/error.hpp"
#include "trl/propagator.hpp"

using namespace trl;

namespace {

// Oracle for s(v) by brute-force midpoint integration of the raw bump.
double smoothstep_oracle(double v) {
    auto b = [](double w) { return (w <= 0 || w >= 1) ? 0.0 : std::exp(-1.0 / (w * (1 - w))); };
    const int n = 200000;
    long double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        const double w = (i + 0.5) / n;
        den += b(w);
        if (w < v) num += b(w);
    }
    return static_cast<double>(num / den);
}

double bump_hat_oracle(const BumpProfile& eta, double xi) {
    const int n = 400000;
    const double L = eta.support();
    long double acc = 0;
    for (int i = 0; i < n; ++i) {
        const double u = -L + (i + 0.5) * 2 * L / n;
        acc += eta(u) * std::cos(2 * std::numbers::pi * u * xi);
    }
    return static_cast<double>(acc * 2 * L / n);
}

}  // namespace

TEST_SUITE("propagator") {

TEST_CASE("smoothstep and cutoff profile") {
    CHECK(smoothstep(0.0) == 0.0);
    CHECK(smoothstep(1.0) == 1.0);
    CHECK(smoothstep(0.5) == 0.5);
    for (double v = 0.01; v < 1.0; v += 0.01) {
        REQUIRE(smoothstep(v) + smoothstep(1 - v) == doctest::Approx(1.0).epsilon(1e-15));
        REQUIRE(smoothstep(v) >= smoothstep(v - 0.01));
    }
    for (double v : {0.1, 0.3, 0.45, 0.7}) CHECK(std::abs(smoothstep(v) - smoothstep_oracle(v)) < 1e-6);
    // derivative consistency
    for (double v = 0.05; v < 1.0; v += 0.05) {
        const double h = 1e-5;
        CHECK((smoothstep(v + h) - smoothstep(v - h)) / (2 * h) == doctest::Approx(smoothstep_derivative(v)).epsilon(1e-6));
    }
    CHECK(gamma_cutoff(0.5) == 1.0);
    CHECK(gamma_cutoff(3.0) == 0.0);
    CHECK(gamma_cutoff(-1.0) == 1.0);
    CHECK(gamma_cutoff(2.0) == 0.0);
    const double g = gamma_cutoff(1.5);
    CHECK(g > 0.0);
    CHECK(g < 1.0);
    CHECK(g == doctest::Approx(1.0 - gamma_cutoff(1.5)).epsilon(1e-12));  // midpoint of the transition is 1/2
    CHECK(gamma_cutoff(1.25) == doctest::Approx(1.0 - gamma_cutoff(1.75)).epsilon(1e-14));
    for (double u = -3; u <= 3; u += 0.013) REQUIRE(gamma_cutoff(u) == gamma_cutoff(-u));
}

TEST_CASE("bump profiles and transforms") {
    CHECK(arc_bump()(0.0) == 1.0);
    CHECK(arc_bump()(0.05) == 1.0);
    CHECK(arc_bump()(0.1) == 0.0);
    CHECK(annular_bump()(0.1) == 0.0);
    CHECK(annular_bump()(0.3) == 1.0);
    CHECK(annular_bump()(1.0) == 0.0);
    CHECK(filled_bump()(0.2) == 1.0);
    CHECK(arc_bump().integral() == doctest::Approx(0.15));
    CHECK(annular_bump().integral() == doctest::Approx(1.125));
    for (const BumpProfile* b : {&arc_bump(), &annular_bump(), &filled_bump()}) {
        CHECK(b->hat(0.0) == doctest::Approx(b->integral()).epsilon(1e-14));
        for (double xi : {0.3, 1.0, 4.7, 12.0, 40.0}) {
            REQUIRE(std::abs(b->hat(xi) - bump_hat_oracle(*b, xi)) < 1e-9);
            REQUIRE(std::abs(b->hat(xi)) <= b->hat_max() + 1e-15);
            REQUIRE(b->hat(-xi) == b->hat(xi));
        }
    }
}

TEST_CASE("propagator examples and symmetries") {
    for (i64 N : {2, 7, 16}) {
        double mass = 0;
        double alt = 0;
        for (i64 k = -2 * N; k <= 2 * N; ++k) {
            mass += gamma_cutoff(static_cast<double>(k) / N);
            alt += gamma_cutoff(static_cast<double>(k) / N) * (k % 2 == 0 ? 1 : -1);
        }
        const cplx g0 = propagator_G(0, 0, N);
        CHECK(g0.real() == doctest::Approx(mass).epsilon(1e-14));
        CHECK(g0.real() >= 2 * N + 1);
        CHECK(std::abs(propagator_G(0.5, 0, N) - cplx(alt)) < 1e-12);
    }
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 300; ++i) {
        const i64 N = 2 + static_cast<i64>(rng() % 63);
        const double t = U(rng), x = U(rng);
        const cplx g = propagator_G(t, x, N);
        REQUIRE(std::abs(propagator_G(t, -x, N) - g) <= 1e-10);
        REQUIRE(std::abs(propagator_G(t + 1, x, N) - g) <= 1e-10);
        REQUIRE(std::abs(propagator_G(t, x + 1, N) - g) <= 1e-10);
        REQUIRE(std::abs(propagator_G(1.0, x, N) - propagator_G(0.0, x, N)) <= 1e-10);
        REQUIRE(std::abs(g) <= 4.0 * N + 1);
        const Propagator fast(N);
        REQUIRE(std::abs(fast(t, x) - g) <= 1e-11);
        REQUIRE(std::abs(g) <= fast.mass() + 1e-9);
    }
}

TEST_CASE("oscillatory integral") {
    for (i64 N : {8, 16, 64}) {
        const cplx j = oscillatory_J(0, 0, 0, 1, N);
        CHECK(std::abs(j.imag()) < 1e-9 * N);
        CHECK(j.real() == doctest::Approx(3.0 * N).epsilon(1e-9));  // plateau 2N + two transitions of mean 1/2
        CHECK(j.real() >= 2.0 * N);
        CHECK(j.real() <= 4.0 * N);
        // |x + m/q| >= 10/N: integration-by-parts decay
        for (i64 m = 1; m <= 5; ++m) {
            const double x = 10.0 / N + 0.01 * m;
            CHECK(std::abs(oscillatory_J(x, 0, 0, 1, N)) <= N / 10.0);
            if (static_cast<double>(m) / 3.0 >= 10.0 / N) CHECK(std::abs(oscillatory_J(0.0, 0, m, 3, N)) <= N / 10.0);
        }
    }
    const cplx j = oscillatory_J(0, 1e-6, 0, 1, 64);
    CHECK(std::abs(j) <= 4.0 * std::min(4.0 * 64, 1.0 / std::sqrt(1e-6)));
}

TEST_CASE("poisson decomposition reproduces the propagator") {
    auto check = [](RationalArc arc, double x, i64 N) {
        const cplx direct = propagator_G(static_cast<double>(arc.a) / arc.q + arc.phi, x, N);
        const cplx poisson = poisson_decomposition(arc, x, N, default_m_window(arc, x, N));
        return std::abs(direct - poisson) / (2.0 * N + 1);
    };
    CHECK(check({1, 2, 0.0}, 0.0, 16) < 1e-6);
    CHECK(check({1, 5, 1e-4}, 0.3, 32) < 1e-6);
    CHECK(check({0, 1, 0.003}, 0.0, 16) < 1e-6);
    CHECK(check({0, 1, 0.003}, 0.71, 16) < 1e-6);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 12; ++i) {
        const i64 N = 8 + static_cast<i64>(rng() % 40);
        const i64 q = 1 + static_cast<i64>(rng() % 50);
        i64 a = 0;
        do a = static_cast<i64>(rng() % static_cast<u64>(q)); while (gcd(a, q) != 1);
        const double phi = (2 * U(rng) - 1) / static_cast<double>(N * q);
        REQUIRE(check({a, q, phi}, U(rng), N) < 1e-6);
    }
    CHECK_THROWS_AS(poisson_decomposition({2, 4, 0.0}, 0.0, 8, 10), Error);
}

TEST_CASE("dispersive scan") {
    const auto rep = dispersive_ratio_scan(16, 256, 16, true);
    CHECK(rep.all_finite_positive);
    CHECK(rep.rows.size() == 257 * 16);
    // ratio at t = 0, x = 0 is G(0,0)/N
    const auto& first = rep.rows.front();
    CHECK(first.t == 0.0);
    CHECK(first.q == 1);
    CHECK(first.ratio >= 2.0);
    CHECK(first.ratio <= 5.0);
    CHECK(rep.max_ratio >= first.ratio);
    CHECK(rep.prime_arc_max > 0.0);
    std::size_t total = 0;
    for (auto h : rep.histogram) total += h;
    CHECK(total == rep.rows.size());
    CHECK_THROWS_AS(dispersive_ratio_scan(4, 10, 10), Error);
}

}  // TEST_SUITE
