#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace smm {

/// Deterministic seedable 64-bit mix-and-split pseudorandom generator.
///
/// The state advances by a fixed odd constant (the 64-bit golden gamma) and
/// each output is produced by a xor-shift/multiply finalizer, so the draw
/// sequence is a pure function of the seed and is identical across platforms
/// with 64-bit integer arithmetic.  Independent sub-streams for distinct roles
/// (e.g. the xi-batch, eta-batch, and residual streams of a solver run) are
/// derived by hashing the (seed, role tag) pair through the same finalizer;
/// distinct tags give statistically independent streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive the sub-stream generator for `role` from a master seed.
    static Rng derive(std::uint64_t seed, std::string_view role) {
        return Rng(derive_seed(seed, role));
    }

    /// Hash (seed, role tag) into a sub-stream seed: FNV-1a over the tag
    /// bytes, combined with the master seed, then finalized.
    static std::uint64_t derive_seed(std::uint64_t seed, std::string_view role) {
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
        for (unsigned char c : role) {
            h ^= c;
            h *= 0x100000001b3ULL;  // FNV-1a prime
        }
        return mix(seed ^ mix(h));
    }

    /// Next raw 64-bit draw.
    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;  // golden gamma
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a logarithm argument.
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform index in {0, ..., n-1} via the 128-bit multiply-shift map.
    /// The rejection-free map has bias below n / 2^64, negligible at this
    /// scale and chosen so the draw count per sample is input-independent.
    std::size_t next_index(std::size_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::size_t>((u128(next_u64()) * u128(n)) >> 64);
    }

    /// Standard Gaussian draw via the Box-Muller transform.  Draws two
    /// uniforms per pair and caches the second variate.
    double next_gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace smm
