#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace frcom {

// splitmix64 finalizer; also used to derive substream seeds
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic random stream (xoshiro256** state seeded through splitmix64).
///
/// Streams are split by (index, purpose tag) so adding a chain never perturbs
/// the draws of another. All sampling helpers are implemented here rather
/// than through <random> distributions so that output sequences are identical
/// across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed) {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z += 0x9e3779b97f4a7c15ULL;
            w = mix64(z);
        }
    }

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent child stream identified by an index and a purpose tag.
    RngStream split(std::uint64_t index, std::string_view tag = {}) const noexcept {
        return RngStream(mix64(seed_ ^ mix64(index + 0x632be59bd9b4e019ULL) ^ hash_tag(tag)));
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        // Lemire's nearly-divisionless rejection method
        __uint128_t m = static_cast<__uint128_t>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform real in the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double log_uniform() noexcept { return std::log(uniform()); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t s_[4]{};
};

} // namespace frcom
