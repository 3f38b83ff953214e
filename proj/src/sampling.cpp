#include "spherestat/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "spherestat/coords.hpp"
#include "spherestat/errors.hpp"

namespace spherestat {

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
    if (bound == 0) throw DomainError("empty sampling range");
    // Largest multiple of bound representable; draws above it are rejected.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = next();
        if (r >= threshold) return r % bound;
    }
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::vector<std::int64_t> sampleWithoutReplacement(std::int64_t n, std::int64_t k, std::uint64_t seed) {
    if (n < 0 || k < 0) throw DomainError("sample sizes must be non-negative");
    if (k > n) throw DomainError("sample size " + std::to_string(k) + " exceeds population " + std::to_string(n));
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(k));
    if (k == n) {
        for (std::int64_t i = 1; i <= n; ++i) out.push_back(i);
        return out;
    }
    SplitMix64 rng(seed);
    std::unordered_set<std::int64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(k) * 2);
    for (std::int64_t j = n - k; j < n; ++j) {
        const auto t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(j) + 1));
        const std::int64_t pick = chosen.count(t) ? j : t;
        chosen.insert(pick);
        out.push_back(pick + 1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace spherestat
