#pragma once

// Deterministic randomness. std::mt19937_64 supplies the raw stream; the
// bounded-int, unit-interval and gaussian draws are spelled out here because
// the std::*_distribution adapters are implementation-defined and would break
// reproducibility across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "facekit/error.hpp"

namespace facekit {

// splitmix64: the usual seed expander/mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, stream). Used for
// per-classifier, per-run and per-class RNGs so that parallel and serial
// execution see identical draws.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= stream + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    return a ^ splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t bounded(std::uint64_t n) {
        require(n >= 1, errc::bad_argument, "bounded(0)");
        const std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
        std::uint64_t x;
        do {
            x = gen_();
        } while (x < threshold);
        return x % n;
    }

    // Uniform double in [0, 1), 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform double in [-1, 1).
    double symmetric_unit() { return 2.0 * unit() - 1.0; }

    // Standard normal via Box-Muller; caches the second value of each pair.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - unit();  // (0, 1]
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // d distinct values from {0, ..., n-1}, uniform over subsets, in draw order.
    std::vector<int> sample_without_replacement(int n, int d) {
        require(d >= 1 && d <= n, errc::bad_argument, "sample size out of range");
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        // Partial Fisher-Yates: only the first d slots are needed.
        for (int i = 0; i < d; ++i) {
            const std::size_t j = static_cast<std::size_t>(i) +
                static_cast<std::size_t>(bounded(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(d));
        return pool;
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace facekit
