#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "trl/arith.hpp"

namespace trl {

/// Integer points k in Z^d with |k|^2 = lambda, stored row-major in
/// lexicographic order.
struct Shell {
    int d = 0;
    i64 lambda = 0;
    std::vector<std::int32_t> coords;

    std::size_t count() const { return d == 0 ? 0 : coords.size() / static_cast<std::size_t>(d); }
    std::span<const std::int32_t> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
};

/// Integer points with N - delta/2 <= |k| <= N + delta/2, grouped by |k|^2
/// ascending and lexicographic within each shell.
struct Annulus {
    int d = 0;
    i64 N = 0;
    double delta = 0.0;
    i64 lambda_lo = 0;  // smallest admissible |k|^2
    i64 lambda_hi = -1;  // largest admissible |k|^2
    std::vector<std::int32_t> coords;

    std::size_t count() const { return d == 0 ? 0 : coords.size() / static_cast<std::size_t>(d); }
    std::span<const std::int32_t> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
};

struct EnumerationLimits {
    i64 max_lambda = 1'000'000;
    /// Budget on the number of coordinate prefixes visited.
    double max_ops = 4e9;
};

inline constexpr int kMaxDimension = 9;

/// Exact floor(sqrt(n)) for n >= 0.
i64 isqrt(i64 n) noexcept;

/// Estimated descent cost: lattice points in the (d-1)-ball of radius sqrt(lambda)+1.
double enumeration_cost(int d, i64 lambda);

/// Throws ScaleExceeded when lambda or the estimated cost exceeds the limits.
Shell enumerate_shell(int d, i64 lambda, const EnumerationLimits& limits = {});

Annulus enumerate_annulus(int d, i64 N, double delta, const EnumerationLimits& limits = {});

/// Admissible |k|^2 range [lo, hi] for the closed annulus around N of width
/// delta, resolved by exact rational comparison. hi < lo when empty.
std::pair<i64, i64> annulus_lambda_range(i64 N, double delta);

// Binary shell cache. Layout (little-endian): "TRLB", u16 version = 1, u8 d,
// u64 lambda, u64 count, u32 CRC32(payload), then count * d int32 coordinates.

inline constexpr std::uint16_t kShellCacheVersion = 1;

void write_shell_file(const std::filesystem::path& path, const Shell& shell);

/// Throws CorruptCache on truncation, bad magic/version or checksum mismatch.
Shell read_shell_file(const std::filesystem::path& path);

struct CacheCounters {
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t corrupt = 0;
    std::size_t writes = 0;
};

class ShellCache {
public:
    explicit ShellCache(std::filesystem::path dir, EnumerationLimits limits = {});

    /// Cache lookup keyed by (d, lambda); enumerates and stores on miss or
    /// when the cached file is corrupt.
    Shell get(int d, i64 lambda);

    std::filesystem::path path_for(int d, i64 lambda) const;
    const CacheCounters& counters() const { return counters_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    EnumerationLimits limits_;
    CacheCounters counters_;
};

/// Default cache directory: $TRL_CACHE_DIR or ".trl_cache".
std::filesystem::path default_cache_dir();

}  // namespace trl
