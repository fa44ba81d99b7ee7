#include "trl/lattice.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <unistd.h>

#include <boost/crc.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "trl/error.hpp"
#include "trl/parallel.hpp"

namespace trl {

namespace {

void check_args(int d, i64 lambda, const EnumerationLimits& limits) {
    require(d >= 1 && d <= kMaxDimension, ErrorCode::InvalidArgument,
            "dimension must lie in [1, " + std::to_string(kMaxDimension) + "]");
    require(lambda >= 0, ErrorCode::InvalidArgument, "lambda must be nonnegative");
    require(lambda <= limits.max_lambda, ErrorCode::ScaleExceeded,
            "lambda " + std::to_string(lambda) + " exceeds limit " + std::to_string(limits.max_lambda));
    const double cost = enumeration_cost(d, lambda);
    require(cost <= limits.max_ops, ErrorCode::ScaleExceeded,
            "estimated enumeration cost " + std::to_string(cost) + " exceeds budget");
}

// Appends all completions of `prefix` (first `fixed` coordinates set) whose
// remaining squared norm equals `residual`, in lexicographic order.
void descend(int d, int fixed, i64 residual, std::vector<std::int32_t>& prefix,
             std::vector<std::int32_t>& out) {
    if (fixed == d - 1) {
        const i64 s = isqrt(residual);
        if (s * s != residual) return;
        prefix[fixed] = static_cast<std::int32_t>(-s);
        out.insert(out.end(), prefix.begin(), prefix.end());
        if (s != 0) {
            prefix[fixed] = static_cast<std::int32_t>(s);
            out.insert(out.end(), prefix.begin(), prefix.end());
        }
        return;
    }
    const i64 r = isqrt(residual);
    for (i64 k = -r; k <= r; ++k) {
        prefix[fixed] = static_cast<std::int32_t>(k);
        descend(d, fixed + 1, residual - k * k, prefix, out);
    }
}

std::vector<std::int32_t> enumerate_points(int d, i64 lambda) {
    if (d == 1) {
        std::vector<std::int32_t> prefix(1);
        std::vector<std::int32_t> out;
        descend(1, 0, lambda, prefix, out);
        return out;
    }
    const i64 r = isqrt(lambda);
    const std::size_t slots = static_cast<std::size_t>(2 * r + 1);
    std::vector<std::vector<std::int32_t>> parts(slots);
    parallel_for(slots, [&](std::size_t i) {
        const i64 k = static_cast<i64>(i) - r;
        std::vector<std::int32_t> prefix(static_cast<std::size_t>(d));
        prefix[0] = static_cast<std::int32_t>(k);
        descend(d, 1, lambda - k * k, prefix, parts[i]);
    });
    std::vector<std::int32_t> out;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    out.reserve(total);
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

template <class T>
void put_le(std::vector<unsigned char>& buf, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
}

template <class T>
T get_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return static_cast<T>(v);
}

constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 8 + 8 + 4;

std::uint32_t crc32(const unsigned char* data, std::size_t n) {
    boost::crc_32_type crc;
    crc.process_bytes(data, n);
    return crc.checksum();
}

}  // namespace

i64 isqrt(i64 n) noexcept {
    if (n <= 0) return 0;
    auto x = static_cast<i64>(std::sqrt(static_cast<double>(n)));
    // Newton correction from the floating estimate, then exact fix-up.
    while (x > 0 && x > n / x) x = (x + n / x) / 2;
    while ((x + 1) <= n / (x + 1)) ++x;
    while (x > n / x) --x;
    return x;
}

double enumeration_cost(int d, i64 lambda) {
    if (d <= 1) return 1.0;
    const double radius = std::sqrt(static_cast<double>(lambda)) + 1.0;
    const double k = d - 1;
    const double unit_ball = std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
    return unit_ball * std::pow(radius, k);
}

Shell enumerate_shell(int d, i64 lambda, const EnumerationLimits& limits) {
    check_args(d, lambda, limits);
    Shell s;
    s.d = d;
    s.lambda = lambda;
    s.coords = enumerate_points(d, lambda);
    return s;
}

std::pair<i64, i64> annulus_lambda_range(i64 N, double delta) {
    using boost::multiprecision::cpp_int;
    require(std::isfinite(delta) && delta >= 0.0, ErrorCode::InvalidArgument, "annulus width must be >= 0");
    int exp = 0;
    const double mant = std::frexp(delta, &exp);
    cpp_int num(static_cast<i64>(std::ldexp(mant, 53)));
    cpp_int den(1);
    const int shift = exp - 53;
    if (shift >= 0) num <<= shift; else den <<= -shift;
    // (N -+ delta/2)^2 = (2 N den -+ num)^2 / (4 den^2)
    const cpp_int lo_num = (2 * N * den - num) * (2 * N * den - num);
    const cpp_int hi_num = (2 * N * den + num) * (2 * N * den + num);
    const cpp_int denom = 4 * den * den;
    cpp_int lo = lo_num / denom;
    if (lo * denom < lo_num) lo += 1;
    const cpp_int hi = hi_num / denom;
    return {static_cast<i64>(lo), static_cast<i64>(hi)};
}

Annulus enumerate_annulus(int d, i64 N, double delta, const EnumerationLimits& limits) {
    require(N >= 1, ErrorCode::InvalidArgument, "annulus radius must be >= 1");
    require(delta <= static_cast<double>(N), ErrorCode::InvalidArgument, "annulus width must be <= N");
    const auto [lo, hi] = annulus_lambda_range(N, delta);
    Annulus a;
    a.d = d;
    a.N = N;
    a.delta = delta;
    a.lambda_lo = lo;
    a.lambda_hi = hi;
    check_args(d, std::max<i64>(hi, 0), limits);
    for (i64 lam = lo; lam <= hi; ++lam) {
        const auto pts = enumerate_points(d, lam);
        a.coords.insert(a.coords.end(), pts.begin(), pts.end());
    }
    return a;
}

void write_shell_file(const std::filesystem::path& path, const Shell& shell) {
    std::vector<unsigned char> payload;
    payload.reserve(shell.coords.size() * 4);
    for (std::int32_t c : shell.coords) put_le(payload, static_cast<std::uint32_t>(c));

    std::vector<unsigned char> buf;
    buf.reserve(kHeaderSize + payload.size());
    for (char c : {'T', 'R', 'L', 'B'}) buf.push_back(static_cast<unsigned char>(c));
    put_le(buf, kShellCacheVersion);
    put_le(buf, static_cast<std::uint8_t>(shell.d));
    put_le(buf, static_cast<std::uint64_t>(shell.lambda));
    put_le(buf, static_cast<std::uint64_t>(shell.count()));
    put_le(buf, crc32(payload.data(), payload.size()));
    buf.insert(buf.end(), payload.begin(), payload.end());

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + tmp.string());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Shell read_shell_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(buf.size() >= kHeaderSize, ErrorCode::CorruptCache, "truncated header in " + path.string());
    require(std::memcmp(buf.data(), "TRLB", 4) == 0, ErrorCode::CorruptCache, "bad magic in " + path.string());
    const auto version = get_le<std::uint16_t>(buf.data() + 4);
    require(version == kShellCacheVersion, ErrorCode::CorruptCache,
            "unsupported version " + std::to_string(version));
    Shell s;
    s.d = get_le<std::uint8_t>(buf.data() + 6);
    s.lambda = static_cast<i64>(get_le<std::uint64_t>(buf.data() + 7));
    const auto count = get_le<std::uint64_t>(buf.data() + 15);
    const auto crc = get_le<std::uint32_t>(buf.data() + 23);
    require(s.d >= 1 && s.d <= kMaxDimension, ErrorCode::CorruptCache, "bad dimension");
    const std::size_t payload_size = static_cast<std::size_t>(count) * static_cast<std::size_t>(s.d) * 4;
    require(buf.size() - kHeaderSize == payload_size, ErrorCode::CorruptCache,
            "payload size mismatch in " + path.string());
    const unsigned char* payload = buf.data() + kHeaderSize;
    require(crc32(payload, payload_size) == crc, ErrorCode::CorruptCache, "checksum mismatch in " + path.string());
    s.coords.resize(static_cast<std::size_t>(count) * static_cast<std::size_t>(s.d));
    for (std::size_t i = 0; i < s.coords.size(); ++i) {
        s.coords[i] = static_cast<std::int32_t>(get_le<std::uint32_t>(payload + 4 * i));
    }
    return s;
}

ShellCache::ShellCache(std::filesystem::path dir, EnumerationLimits limits)
    : dir_(std::move(dir)), limits_(limits) {}

std::filesystem::path ShellCache::path_for(int d, i64 lambda) const {
    return dir_ / ("shell_d" + std::to_string(d) + "_l" + std::to_string(lambda) + ".trlb");
}

Shell ShellCache::get(int d, i64 lambda) {
    const auto path = path_for(d, lambda);
    if (std::filesystem::exists(path)) {
        try {
            Shell s = read_shell_file(path);
            if (s.d == d && s.lambda == lambda) {
                ++counters_.hits;
                return s;
            }
            ++counters_.corrupt;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CorruptCache) throw;
            ++counters_.corrupt;
        }
    } else {
        ++counters_.misses;
    }
    Shell s = enumerate_shell(d, lambda, limits_);
    write_shell_file(path, s);
    ++counters_.writes;
    return s;
}

std::filesystem::path default_cache_dir() {
    if (const char* env = std::getenv("TRL_CACHE_DIR"); env != nullptr && *env != '\0') return env;
    return ".trl_cache";
}

}  // namespace trl
