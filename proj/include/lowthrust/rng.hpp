#pragma once

#include <cmath>
#include <cstdint>

#include "lowthrust/linalg.hpp"

namespace lowthrust {

/// Deterministic RNG with explicitly seedable substreams.
///
/// xoshiro256++ seeded through splitmix64. Distributions are implemented
/// here rather than with <random> so that generated datasets are
/// byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    /// Independent substream derived from (master seed, stream id).
    static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t x = master_seed;
        const std::uint64_t a = splitmix64(x);
        std::uint64_t y = stream_id ^ 0x9e3779b97f4a7c15ULL;
        const std::uint64_t b = splitmix64(y);
        return Rng(a ^ (b + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Log-uniform over [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(kTwoPi * u2);
        have_cached_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    /// Isotropic unit 3-vector.
    Vec3 unit_vector() {
        Vec3 v;
        double n2 = 0.0;
        do {
            v = Vec3(normal(), normal(), normal());
            n2 = v.squaredNorm();
        } while (n2 < 1e-24);
        return v / std::sqrt(n2);
    }

    std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace lowthrust
