#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "trl/energy.hpp"
#include "trl/error.hpp"

using namespace trl;

namespace {

using Point = std::vector<std::int32_t>;

std::vector<Point> points_of(int d, const std::vector<std::int32_t>& coords) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < coords.size(); i += static_cast<std::size_t>(d))
        out.emplace_back(coords.begin() + static_cast<std::ptrdiff_t>(i), coords.begin() + static_cast<std::ptrdiff_t>(i) + d);
    return out;
}

// literal loop over all 2n-tuples
std::uint64_t energy_literal(const std::vector<Point>& pts, int n) {
    if (pts.empty()) return 0;
    const int d = static_cast<int>(pts[0].size());
    std::vector<std::size_t> idx(static_cast<std::size_t>(2 * n), 0);
    std::uint64_t total = 0;
    while (true) {
        bool equal = true;
        for (int j = 0; j < d && equal; ++j) {
            long s = 0;
            for (int i = 0; i < n; ++i) s += pts[idx[i]][j] - pts[idx[n + i]][j];
            equal = s == 0;
        }
        total += equal;
        int i = 2 * n - 1;
        while (i >= 0 && idx[i] + 1 == pts.size()) idx[i--] = 0;
        if (i < 0) break;
        ++idx[i];
    }
    return total;
}

// r_n by recursion over std::map
std::map<Point, std::uint64_t> rep_literal(const std::vector<Point>& pts, int n) {
    std::map<Point, std::uint64_t> cur{{Point(pts[0].size(), 0), 1}};
    for (int step = 0; step < n; ++step) {
        std::map<Point, std::uint64_t> next;
        for (const auto& [v, c] : cur)
            for (const auto& p : pts) {
                Point w = v;
                for (std::size_t j = 0; j < w.size(); ++j) w[j] += p[j];
                next[w] += c;
            }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("packed keys round trip") {
    std::mt19937_64 rng(1);
    for (int d = 1; d <= 9; ++d) {
        for (int t = 0; t < 200; ++t) {
            Point a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) {
                a[j] = static_cast<std::int32_t>(static_cast<long>(rng() % 8001) - 4000);
                b[j] = static_cast<std::int32_t>(static_cast<long>(rng() % 8001) - 4000);
            }
            REQUIRE(sparse::unpack(sparse::pack(a), d) == a);
            Point s(a);
            for (int j = 0; j < d; ++j) s[j] += b[j];
            REQUIRE(sparse::pack(a) + sparse::pack(b) == sparse::pack(s));
        }
    }
}

TEST_CASE("representation function examples") {
    const Shell s1 = enumerate_shell(1, 9);
    const auto h = representation_counts(s1, 2).histogram();
    CHECK(h == std::map<Point, u64>{{{-6}, 1}, {{0}, 2}, {{6}, 1}});
    const Shell s2 = enumerate_shell(2, 25);
    const auto r1 = representation_counts(s2, 1);
    CHECK(r1.support() == 12);
    for (const auto& [k, c] : r1.counts) CHECK(c == 1);
    const auto r2 = representation_counts(s2, 2);
    u64 total = 0;
    for (const auto& [k, c] : r2.counts) total += c;
    CHECK(total == 144);
}

TEST_CASE("representation function vs literal recursion") {
    for (int d = 1; d <= 4; ++d) {
        for (i64 lambda : {1, 5, 9, 10}) {
            const Shell s = enumerate_shell(d, lambda);
            if (s.count() == 0) continue;
            const auto pts = points_of(d, s.coords);
            for (int n = 1; n <= 3; ++n) {
                const auto rep = representation_counts(s, n);
                const auto oracle = rep_literal(pts, n);
                REQUIRE(rep.histogram() == oracle);
                // invariants: total mass, negation symmetry, energy = sum r^2
                u64 mass = 1;
                for (int i = 0; i < n; ++i) mass *= s.count();
                u64 sum = 0, sq = 0;
                for (const auto& [v, c] : oracle) {
                    sum += c;
                    sq += c * c;
                    Point neg(v);
                    for (auto& x : neg) x = -x;
                    REQUIRE(oracle.at(neg) == c);
                }
                REQUIRE(sum == mass);
                REQUIRE(additive_energy(s, n) == sq);
            }
        }
    }
}

TEST_CASE("energy examples") {
    const std::vector<std::int32_t> single{3, -1};
    for (int n = 1; n <= 4; ++n) CHECK(additive_energy_bruteforce(2, single, n) == 1);
    const std::vector<std::int32_t> two{0, 0, 1, 0};  // {0, e1}
    CHECK(additive_energy_bruteforce(2, two, 2) == 6);
    CHECK(energy_literal(points_of(2, two), 2) == 6);
    Shell pair;
    pair.d = 2;
    pair.coords = two;
    CHECK(additive_energy(pair, 2) == 6);
    const std::vector<std::int32_t> none;
    CHECK(additive_energy_bruteforce(3, none, 2) == 0);
    const Shell s = enumerate_shell(3, 9);
    CHECK(additive_energy_bruteforce(3, s.coords, 1) == s.count());
    CHECK(additive_energy(s, 1) == s.count());
}

TEST_CASE("brute force agrees with the literal 2n-tuple count") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 3);
        const std::size_t m = 1 + rng() % 7;
        std::vector<std::int32_t> coords;
        for (std::size_t i = 0; i < m * static_cast<std::size_t>(d); ++i)
            coords.push_back(static_cast<std::int32_t>(static_cast<long>(rng() % 5) - 2));
        const auto pts = points_of(d, coords);
        for (int n = 1; n <= 3; ++n) REQUIRE(additive_energy_bruteforce(d, coords, n) == energy_literal(pts, n));
    }
    const Shell s = enumerate_shell(2, 25);
    CHECK(additive_energy_bruteforce(2, s.coords, 2) == energy_literal(points_of(2, s.coords), 2));
    CHECK(additive_energy(s, 2) == energy_literal(points_of(2, s.coords), 2));
}

TEST_CASE("convolution energy equals brute force; Cauchy-Schwarz floor") {
    struct Case { int d; i64 lambda_max; int n; };
    for (const Case c : {Case{2, 50, 2}, Case{3, 25, 2}, Case{3, 9, 3}, Case{4, 6, 2}, Case{5, 9, 2}}) {
        for (i64 lambda = 1; lambda <= c.lambda_max; ++lambda) {
            const Shell s = enumerate_shell(c.d, lambda);
            if (s.count() == 0) continue;
            const auto rep = energy_report(s, c.n);
            REQUIRE(rep.energy == additive_energy_bruteforce(c.d, s.coords, c.n));
            REQUIRE(rep.energy >= rep.cs_floor);
            // floor is the exact ceiling
            const BigInt pw = boost::multiprecision::pow(BigInt(s.count()), 2 * c.n);
            REQUIRE(rep.cs_floor * rep.sumset_size >= pw);
            REQUIRE((rep.cs_floor - 1) * rep.sumset_size < pw);
        }
    }
    CHECK(cs_floor(12, 0, 2) == 0);
    CHECK(cs_floor(3, 7, 1) == 2);  // ceil(9/7)
}

TEST_CASE("Nyquist grid energy matches the integer count") {
    for (int d = 2; d <= 5; ++d) {
        for (i64 N = 1; N <= (d <= 3 ? 6 : 3); ++N) {
            const Shell s = enumerate_shell(d, N * N);
            for (int n = 1; n <= 3; ++n) {
                const BigInt exact = additive_energy(s, n);
                const long double grid = energy_nyquist(s, N, n);
                REQUIRE(std::fabs(grid - exact.convert_to<long double>()) < 0.5L);
            }
        }
    }
    const Shell s = enumerate_shell(2, 25);
    CHECK_THROWS_AS(energy_nyquist(s, 4, 2), Error);
}

TEST_CASE("scale guards") {
    const Shell s = enumerate_shell(5, 25);
    CHECK_THROWS_AS(additive_energy_bruteforce(5, s.coords, 2, 1e6), Error);
    sparse::ConvLimits tight;
    tight.max_ops = 1e3;
    try {
        additive_energy(s, 2, tight);
        FAIL("expected ScaleExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ScaleExceeded);
    }
}

TEST_CASE("scaling experiment") {
    const std::vector<double> x{1, 2, 4, 8}, y{3, 24, 192, 1536};
    CHECK(loglog_slope(x, y) == doctest::Approx(3.0));

    const auto rep = energy_scaling_experiment(5, 2, {3, 4, 5, 6});
    CHECK(rep.target_exponent == 7.0);
    REQUIRE(rep.rows.size() == 4);
    for (const auto& r : rep.rows) {
        CHECK(r.exact);
        CHECK(r.energy_exact >= r.cs_floor);
    }
    CHECK(rep.rows[0].energy_exact == 783390);  // matches brute force at N = 3 (checked above)
    CHECK(rep.slope == doctest::Approx(7.0).epsilon(0.15));

    sparse::ConvLimits tight;
    tight.max_ops = 1e5;
    const auto grid = energy_scaling_experiment(5, 2, {3, 4}, nullptr, tight);
    CHECK(!grid.rows[1].exact);
    CHECK(static_cast<double>(grid.rows[1].energy) == doctest::Approx(10112670.0).epsilon(1e-12));

    std::ostringstream os;
    write_energy_csv(os, rep);
    std::string header;
    std::getline(std::istringstream(os.str()) >> std::ws, header);
    CHECK(header == "d,lambda,n,count,energy,sumset_size,cs_floor,ratio_to_power_law");
    CHECK(os.str().find("5,9,2,250,783390,") != std::string::npos);
}

}  // TEST_SUITE
