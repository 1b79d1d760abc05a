#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pfrost {

// FNV-1a, used to derive per-parameter seeds from (run seed, parameter name)
// so initialization does not depend on construction order.
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t mix_seed(uint64_t seed, std::string_view label) {
    uint64_t h = fnv1a(label);
    // splitmix64 finalizer over the combination
    uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull + salt * 0xff51afd7ed558ccdull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG. All distributions are derived from raw mt19937_64 draws
// by fixed arithmetic, so streams are reproducible bit-for-bit for a given
// seed independent of the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // Uniform on the open interval (0, 1).
    double unit() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on the open interval (lo, hi).
    double uniform(double lo, double hi) { return lo + unit() * (hi - lo); }

    // Uniform integer in [0, n).
    size_t index(size_t n) { return static_cast<size_t>(eng_() % n); }

    // In-place Fisher-Yates shuffle with a fixed visit order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace pfrost
