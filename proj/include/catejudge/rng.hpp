#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace catejudge::rng {

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Derives an independent stream key from (seed, purpose tag, indices), so the
// draw order of parallel tasks cannot change any stream's output.
inline std::uint64_t derive_key(std::uint64_t seed, std::string_view tag,
                                std::uint64_t i = 0, std::uint64_t j = 0) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ hash_tag(tag));
    h = mix64(h ^ i);
    h = mix64(h ^ j);
    return h;
}

double quantile_std_normal(double p);  // stats.cpp

// Counter-based generator: output t is mix64(key ^ mix64(t)). Streams with
// distinct keys are independent for Monte Carlo purposes.
class Stream {
public:
    Stream(std::uint64_t seed, std::string_view tag, std::uint64_t i = 0,
           std::uint64_t j = 0)
        : key_(derive_key(seed, tag, i, j)) {}

    std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via the inverse CDF; (bits + 0.5) * 2^-53 is in (0, 1).
    double next_normal() {
        double p = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
        return quantile_std_normal(p);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Unbiased integer in [0, n) (Lemire's multiply-shift rejection).
    std::uint64_t next_below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace catejudge::rng
