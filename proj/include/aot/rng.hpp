#pragma once

#include <cmath>
#include <cstdint>

namespace aot {

// splitmix64 step (Steele, Lea, Flood). Used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and up to two tags.
// Synthetic corpora replay draws through this function, so its definition is
// part of the dataset format.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag_a, std::uint64_t tag_b = 0) {
    std::uint64_t s = seed;
    (void)splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL * (tag_a + 1);
    (void)splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (tag_b + 1);
    std::uint64_t out = splitmix64(s);
    return out;
}

// xoshiro256** 1.0 (Blackman & Vigna, public domain reference implementation).
// Chosen over std::mt19937 + <random> distributions because the standard
// distributions are not bit-portable across library implementations; every
// derived quantity below is defined arithmetic on the raw 64-bit stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0,1): top 53 bits scaled by 2^-53.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0,n). Defined as floor(uniform()*n); exact for the
    // small n used here.
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * n);
        return v < n ? v : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; consumes two uniforms per pair, caches the second value.
    double normal(double mean = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sigma * spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + sigma * r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace aot
