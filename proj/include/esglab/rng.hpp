#pragma once

// Seedable randomness with pinned draw semantics. All stochastic code in
// the library goes through NormalSampler / bounded_uint on an mt19937_64
// stream so that a seed fully determines every output, and derived streams
// (per size, per replication) never overlap by construction of the
// splitmix-style hash chain.

#include <cstdint>
#include <limits>
#include <random>

namespace esglab {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ v);
}

// Stream tags keep replication seeds and the reference-set seed disjoint.
inline constexpr std::uint64_t kReplicationStreamTag = 0x7265706c69636174ull;  // "replicat"
inline constexpr std::uint64_t kReferenceStreamTag = 0x7265666572656e63ull;    // "referenc"

inline std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t size,
                                      std::uint64_t replication) {
    std::uint64_t h = hash_combine(master_seed, kReplicationStreamTag);
    h = hash_combine(h, size);
    return hash_combine(h, replication);
}

inline std::uint64_t reference_seed(std::uint64_t master_seed) {
    return hash_combine(master_seed, kReferenceStreamTag);
}

// Unbiased integer in [0, n) via rejection.
inline std::uint64_t bounded_uint(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x = gen();
    while (x >= limit) x = gen();
    return x % n;
}

// Standard normal draws via Box-Muller on explicit 53-bit uniforms. The
// draw order and arithmetic are pinned here rather than delegated to
// std::normal_distribution, whose output is implementation-defined.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::mt19937_64& raw() { return gen_; }

private:
    double uniform01() {
        // [0, 1) with 53 random bits
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 gen_;
    bool have_spare_{false};
    double spare_{0.0};
};

}  // namespace esglab
