#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>
#include <vector>

#include "trl/error.hpp"
#include "trl/lattice.hpp"

using namespace trl;

namespace {

using Point = std::vector<std::int32_t>;

std::vector<Point> to_points(const std::vector<std::int32_t>& coords, int d) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < coords.size(); i += static_cast<std::size_t>(d))
        out.emplace_back(coords.begin() + static_cast<std::ptrdiff_t>(i),
                         coords.begin() + static_cast<std::ptrdiff_t>(i) + d);
    return out;
}

// Full-box brute force in [-r, r]^d, lexicographic.
std::vector<Point> box_points(int d, i64 r, i64 lo, i64 hi) {
    std::vector<Point> out;
    Point p(static_cast<std::size_t>(d), static_cast<std::int32_t>(-r));
    while (true) {
        i64 n = 0;
        for (auto c : p) n += static_cast<i64>(c) * c;
        if (n >= lo && n <= hi) out.push_back(p);
        int j = d - 1;
        while (j >= 0 && p[static_cast<std::size_t>(j)] == r) p[static_cast<std::size_t>(j--)] = static_cast<std::int32_t>(-r);
        if (j < 0) break;
        ++p[static_cast<std::size_t>(j)];
    }
    return out;
}

i64 sigma(i64 n) {
    i64 s = 0;
    for (i64 k = 1; k <= n; ++k)
        if (n % k == 0) s += k;
    return s;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("trl_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("isqrt is exact") {
    for (i64 n = 0; n < 100000; ++n) {
        const i64 s = isqrt(n);
        REQUIRE(s * s <= n);
        REQUIRE((s + 1) * (s + 1) > n);
    }
    const i64 big = 3037000499LL;  // floor(sqrt(2^63 - 1))
    CHECK(isqrt(big * big) == big);
    CHECK(isqrt(big * big - 1) == big - 1);
}

TEST_CASE("shell examples") {
    auto s = enumerate_shell(2, 25);
    CHECK(s.count() == 12);
    std::set<Point> expect{{5, 0}, {-5, 0}, {0, 5}, {0, -5}, {3, 4}, {3, -4}, {-3, 4}, {-3, -4},
                           {4, 3}, {4, -3}, {-4, 3}, {-4, -3}};
    const auto pts = to_points(s.coords, 2);
    CHECK(std::set<Point>(pts.begin(), pts.end()) == expect);
    s = enumerate_shell(1, 9);
    CHECK(to_points(s.coords, 1) == std::vector<Point>{{-3}, {3}});
    CHECK(enumerate_shell(2, 3).count() == 0);
    CHECK(enumerate_shell(4, 1).count() == 8);
    CHECK(enumerate_shell(3, 0).count() == 1);
}

TEST_CASE("shell agrees with full-box brute force for d <= 4, lambda <= 100") {
    for (int d = 1; d <= 4; ++d) {
        for (i64 lam = 0; lam <= 100; ++lam) {
            const auto s = enumerate_shell(d, lam);
            REQUIRE(to_points(s.coords, d) == box_points(d, isqrt(lam), lam, lam));
        }
    }
}

TEST_CASE("shell closure under negation, permutation and sign flips") {
    for (int d : {2, 3, 5}) {
        for (i64 lam : {25, 50, 99}) {
            const auto s = enumerate_shell(d, lam);
            const auto pts = to_points(s.coords, d);
            const std::set<Point> set(pts.begin(), pts.end());
            REQUIRE(set.size() == pts.size());
            for (auto p : pts) {
                i64 n = 0;
                for (auto c : p) n += static_cast<i64>(c) * c;
                REQUIRE(n == lam);
                Point neg = p;
                for (auto& c : neg) c = -c;
                REQUIRE(set.count(neg));
                Point flip = p;
                flip[0] = -flip[0];
                REQUIRE(set.count(flip));
                Point perm = p;
                std::rotate(perm.begin(), perm.begin() + 1, perm.end());
                REQUIRE(set.count(perm));
                std::swap(perm[0], perm[1]);
                REQUIRE(set.count(perm));
            }
        }
    }
}

TEST_CASE("four-square counts r4(n) = 8 sigma(n) for odd n") {
    for (i64 n = 1; n <= 200; n += 2) REQUIRE(enumerate_shell(4, n).count() == static_cast<std::size_t>(8 * sigma(n)));
}

TEST_CASE("five-dimensional shells are nonempty") {
    for (i64 lam = 1; lam <= 400; ++lam) REQUIRE(enumerate_shell(5, lam).count() > 0);
}

TEST_CASE("deterministic regardless of thread count") {
    const auto a = enumerate_shell(5, 300);
    setenv("TRL_THREADS", "1", 1);
    const auto b = enumerate_shell(5, 300);
    setenv("TRL_THREADS", "4", 1);
    const auto c = enumerate_shell(5, 300);
    unsetenv("TRL_THREADS");
    CHECK(a.coords == b.coords);
    CHECK(a.coords == c.coords);
}

TEST_CASE("scale guards") {
    CHECK_THROWS_AS(enumerate_shell(9, 10'000'000), Error);
    try {
        enumerate_shell(9, 10'000'000);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ScaleExceeded);
    }
    EnumerationLimits tight;
    tight.max_ops = 1000;
    CHECK_THROWS_AS(enumerate_shell(6, 400, tight), Error);
    CHECK_THROWS_AS(enumerate_shell(10, 4), Error);
}

TEST_CASE("annulus") {
    auto a = enumerate_annulus(2, 5, 0.0);
    CHECK(a.count() == 12);
    CHECK(a.lambda_lo == 25);
    CHECK(a.lambda_hi == 25);
    a = enumerate_annulus(2, 5, 2.0);
    CHECK(a.lambda_lo == 16);
    CHECK(a.lambda_hi == 36);
    auto brute = box_points(2, 6, 16, 36);
    auto got = to_points(a.coords, 2);
    CHECK(std::set<Point>(got.begin(), got.end()) == std::set<Point>(brute.begin(), brute.end()));
    CHECK(got.size() == brute.size());
    a = enumerate_annulus(3, 2, 1.0);
    CHECK(a.lambda_lo == 3);
    CHECK(a.lambda_hi == 6);
    brute = box_points(3, 3, 3, 6);
    got = to_points(a.coords, 3);
    CHECK(std::set<Point>(got.begin(), got.end()) == std::set<Point>(brute.begin(), brute.end()));
    // closed interval: (N +- delta/2)^2 lands on an integer at delta = 1, N = 3: 6.25, 12.25
    const auto [lo, hi] = annulus_lambda_range(3, 1.0);
    CHECK(lo == 7);
    CHECK(hi == 12);
    const auto [lo2, hi2] = annulus_lambda_range(4, 2.0);  // 9 and 25 exactly, included
    CHECK(lo2 == 9);
    CHECK(hi2 == 25);
}

TEST_CASE("cache round trip, hits and corruption") {
    const auto dir = temp_dir("cache");
    const auto s = enumerate_shell(5, 25);
    const auto path = dir / "x.trlb";
    write_shell_file(path, s);
    const auto r = read_shell_file(path);
    CHECK(r.d == 5);
    CHECK(r.lambda == 25);
    CHECK(r.coords == s.coords);

    // truncated
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    CHECK_THROWS_AS(read_shell_file(path), Error);
    try {
        read_shell_file(path);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptCache);
    }

    // flipped payload byte -> checksum mismatch
    write_shell_file(path, s);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(40);
        f.put('\x7f');
    }
    CHECK_THROWS_AS(read_shell_file(path), Error);

    ShellCache cache(dir);
    auto first = cache.get(5, 25);
    CHECK(cache.counters().misses == 1);
    CHECK(cache.counters().writes == 1);
    auto second = cache.get(5, 25);
    CHECK(cache.counters().hits == 1);
    CHECK(cache.counters().writes == 1);
    CHECK(first.coords == second.coords);

    // corrupt the cached file: falls back to enumeration and rewrites
    {
        std::ofstream f(cache.path_for(5, 25), std::ios::binary | std::ios::trunc);
        f << "garbage";
    }
    auto third = cache.get(5, 25);
    CHECK(cache.counters().corrupt == 1);
    CHECK(cache.counters().writes == 2);
    CHECK(third.coords == s.coords);
    CHECK(read_shell_file(cache.path_for(5, 25)).coords == s.coords);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
