#pragma once

// Sparse functions on Z^d with d <= 9, keyed by k_0 + k_1 B + ... + k_{d-1} B^{d-1}
// (B = 2^14) in a signed 128-bit integer. The packing is linear, so the key of
// a sum is the sum of the keys, as long as every coordinate stays below B/2.

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "trl/arith.hpp"
#include "trl/error.hpp"

namespace trl::sparse {

using Key = i128;

inline constexpr int kBits = 14;
inline constexpr i64 kCoordLimit = (i64{1} << (kBits - 1)) - 1;

inline Key pack(std::span<const std::int32_t> k) {
    Key key = 0;
    for (std::size_t j = k.size(); j-- > 0;) key = key * (Key{1} << kBits) + k[j];
    return key;
}

inline std::vector<std::int32_t> unpack(Key key, int d) {
    std::vector<std::int32_t> out(static_cast<std::size_t>(d));
    constexpr Key base = Key{1} << kBits;
    for (int j = 0; j < d; ++j) {
        Key low = key % base;  // truncates toward zero
        if (low > base / 2) low -= base;
        if (low < -base / 2) low += base;
        out[static_cast<std::size_t>(j)] = static_cast<std::int32_t>(low);
        key = (key - low) / base;
    }
    return out;
}

template <class V>
using Vec = std::vector<std::pair<Key, V>>;

/// Sorts by key and adds up duplicates.
template <class V>
void normalize(Vec<V>& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (out > 0 && v[out - 1].first == v[i].first) {
            v[out - 1].second += v[i].second;
        } else {
            v[out++] = v[i];
        }
    }
    v.resize(out);
}

template <class V>
Vec<V> merge(const Vec<V>& a, const Vec<V>& b) {
    Vec<V> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.push_back(b[j++]);
        } else {
            out.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i, ++j;
        }
    }
    return out;
}

struct ConvLimits {
    double max_ops = 4e9;            // |A| |B| products
    std::size_t max_entries = 60'000'000;
    std::size_t chunk = 1 << 22;     // products buffered before a sort
};

/// (A * B)(v) = sum_{a + b = v} A(a) B(b). Inputs must be normalized.
/// `mul` combines values so callers can check for overflow.
template <class V, class Mul>
Vec<V> convolve(const Vec<V>& A, const Vec<V>& B, const ConvLimits& limits, Mul&& mul) {
    const double ops = static_cast<double>(A.size()) * static_cast<double>(B.size());
    require(ops <= limits.max_ops, ErrorCode::ScaleExceeded,
            "convolution needs " + std::to_string(ops) + " products");
    Vec<V> result, buffer;
    buffer.reserve(std::min<std::size_t>(limits.chunk + B.size(), static_cast<std::size_t>(ops) + 1));
    auto flush = [&] {
        normalize(buffer);
        result = result.empty() ? std::move(buffer) : merge(result, buffer);
        require(result.size() <= limits.max_entries, ErrorCode::ScaleExceeded, "sumset exceeds memory budget");
        buffer.clear();
    };
    for (const auto& [ka, va] : A) {
        for (const auto& [kb, vb] : B) buffer.emplace_back(ka + kb, mul(va, vb));
        if (buffer.size() >= limits.chunk) flush();
    }
    if (!buffer.empty() || result.empty()) flush();
    return result;
}

}  // namespace trl::sparse
