// Deterministic random draws. The standard distributions are
// implementation-defined, so uniforms are built directly from the mt19937_64
// bit stream; identical seeds give identical streams on every platform.
#pragma once

#include <cstdint>
#include <random>

#include "wdr/common.hpp"

namespace wdr {

/// SplitMix64 step, used to derive well-separated sub-seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : gen(splitmix64(seed)) {}

    /// Independent generator for a numbered substream (one per trial or per
    /// episode); insensitive to how many draws the parent has made.
    static Rng substream(uint64_t seed, uint64_t stream) {
        return Rng(splitmix64(seed) ^ splitmix64(stream + 0x51ed2701ULL));
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    prec_t uniform() { return static_cast<prec_t>(gen() >> 11) * 0x1.0p-53; }

    prec_t uniform(prec_t lo, prec_t hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in {0, ..., n-1}.
    size_t uniform_index(size_t n) {
        assert(n > 0);
        size_t i = static_cast<size_t>(uniform() * static_cast<prec_t>(n));
        return i < n ? i : n - 1;
    }

    /// Flat Dirichlet draw over k coordinates (normalized exponentials).
    numvec dirichlet(size_t k) {
        numvec x(k);
        prec_t total = 0;
        for (size_t i = 0; i < k; ++i) {
            prec_t u = uniform();
            while (u <= 0) u = uniform();
            x[i] = -std::log(u);
            total += x[i];
        }
        for (auto& v : x) v /= total;
        return x;
    }

    /// Index draw from an explicit probability vector (cumulative scan).
    size_t categorical(const numvec& weights) {
        assert(!weights.empty());
        const prec_t u = uniform();
        prec_t acc = 0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 gen;
};

} // namespace wdr
