#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace copo {

// Stream ids for mix_seed: keeping each consumer on its own stream means
// adding or removing draws in one component (say, LCF sampling) never
// shifts the randomness seen by another (say, the environment).
namespace streams {
inline constexpr uint64_t kEnv = 1;
inline constexpr uint64_t kAction = 2;
inline constexpr uint64_t kLcf = 3;
inline constexpr uint64_t kShuffle = 4;
inline constexpr uint64_t kInit = 5;
inline constexpr uint64_t kEval = 6;
}  // namespace streams

// Mixes a base seed with a stream index so that independent components
// (environment, action sampling, LCF sampling, shuffling) draw from
// unrelated streams. splitmix64 finalizer.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG. std::mt19937_64 gives a portable bit stream; the
// distributions are implemented here because the std distribution
// objects are not guaranteed to produce the same values across standard
// library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    void reseed(uint64_t seed) {
        engine_.seed(seed);
        has_cached_ = false;
    }

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    int uniform_int(int n) {
        const uint64_t un = static_cast<uint64_t>(n);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace copo
