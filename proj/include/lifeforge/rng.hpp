#pragma once
// Counter-based deterministic RNG.
//
// Every random draw in the pipeline comes from a stream keyed by
// (global seed, stage name, entity id). Streams are independent of
// scheduling order, so output is identical for any worker count.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lifeforge {

inline constexpr uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

inline uint64_t fnv1a(std::string_view s, uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a_u64(uint64_t v, uint64_t h = kFnvOffset) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (i * 8)) & 0xff;
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic stream of draws. Copyable value type; no shared state.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    // Stream keyed by seed + stage + entity. The entity id is typically a
    // hierarchical event id or "user_0003/2025-01-14" style path.
    Rng(uint64_t seed, std::string_view stage, std::string_view entity)
        : state_(fnv1a(entity, fnv1a(stage, fnv1a_u64(seed)))) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    int next_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double next_double() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool chance(double p) { return next_double() < p; }

    // Weighted index draw; weights need not be normalized.
    size_t pick_weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) return 0;
        double x = next_double() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (x < acc) return i;
        }
        return weights.size() - 1;
    }

    // Poisson draw via inversion; fine for the small rates used here.
    int next_poisson(double mean) {
        if (mean <= 0.0) return 0;
        double l = std::exp(-mean);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= next_double();
        } while (p > l && k < 1000);
        return k - 1;
    }

private:
    uint64_t state_;
};

}  // namespace lifeforge
