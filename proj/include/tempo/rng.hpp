#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tempo {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// FNV-1a, used to derive stream ids from entity labels.
inline constexpr std::uint64_t stream_id_from_label(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic per-entity random stream. The generator is xoshiro256**
// seeded by mixing (seed, stream_id) through splitmix64, so every entity
// gets an independent stream that is reproducible from the scenario seed
// alone. All sampling goes through explicit algorithms on top of the raw
// 64-bit output; nothing here depends on implementation-defined behaviour
// of <random> distributions.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
        std::uint64_t mix = seed ^ detail::rotl(stream_id, 32) ^ 0x6a09e667f3bcc909ULL;
        s_[0] = detail::splitmix64(mix);
        s_[1] = detail::splitmix64(mix);
        s_[2] = detail::splitmix64(mix);
        s_[3] = detail::splitmix64(mix);
    }

    RngStream(std::uint64_t seed, std::string_view label) noexcept
        : RngStream(seed, stream_id_from_label(label)) {}

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_unit_open() noexcept { return 1.0 - next_unit(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) noexcept {
        // Multiply-shift bounded draw; bias is negligible for n << 2^64 and
        // the map is deterministic, which is what matters here.
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) noexcept { return next_unit() < p; }

private:
    std::uint64_t s_[4];
};

// Standard normal via Box-Muller. Always consumes exactly two uniforms so
// draw counts stay aligned across paired runs.
inline double draw_standard_normal(RngStream& rng) noexcept {
    double u1 = rng.next_unit_open();
    double u2 = rng.next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace tempo
