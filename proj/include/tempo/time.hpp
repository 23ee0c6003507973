#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace tempo {

// All simulation time is integer nanoseconds. Spans are signed so that
// differences are well defined; instants are unsigned ticks since the
// simulation origin. Conversions from real-valued seconds round half away
// from zero, which for the non-negative durations used throughout is the
// usual round-half-up.
struct Span {
    std::int64_t ns{0};

    static constexpr Span zero() noexcept { return Span{0}; }
    static constexpr Span max() noexcept {
        return Span{std::numeric_limits<std::int64_t>::max()};
    }

    static Span from_seconds(double s) { return Span{std::llround(s * 1e9)}; }
    static Span from_millis(double ms) { return Span{std::llround(ms * 1e6)}; }
    static Span from_micros(double us) { return Span{std::llround(us * 1e3)}; }
    static constexpr Span from_nanos(std::int64_t n) noexcept { return Span{n}; }

    double seconds() const noexcept { return static_cast<double>(ns) * 1e-9; }
    double millis() const noexcept { return static_cast<double>(ns) * 1e-6; }

    constexpr auto operator<=>(const Span&) const noexcept = default;

    constexpr Span operator+(Span o) const noexcept { return Span{ns + o.ns}; }
    constexpr Span operator-(Span o) const noexcept { return Span{ns - o.ns}; }
    constexpr Span operator-() const noexcept { return Span{-ns}; }
    constexpr Span& operator+=(Span o) noexcept {
        ns += o.ns;
        return *this;
    }
    constexpr Span& operator-=(Span o) noexcept {
        ns -= o.ns;
        return *this;
    }
    constexpr Span operator*(std::int64_t k) const noexcept { return Span{ns * k}; }
};

struct Instant {
    std::uint64_t ns{0};

    static constexpr Instant origin() noexcept { return Instant{0}; }
    static constexpr Instant max() noexcept {
        return Instant{std::numeric_limits<std::uint64_t>::max()};
    }

    double seconds() const noexcept { return static_cast<double>(ns) * 1e-9; }

    constexpr auto operator<=>(const Instant&) const noexcept = default;

    constexpr Instant operator+(Span d) const noexcept {
        return Instant{ns + static_cast<std::uint64_t>(d.ns)};
    }
    constexpr Instant operator-(Span d) const noexcept {
        return Instant{ns - static_cast<std::uint64_t>(d.ns)};
    }
    constexpr Instant& operator+=(Span d) noexcept {
        ns += static_cast<std::uint64_t>(d.ns);
        return *this;
    }
    // Difference of instants is a span; callers subtract the earlier one.
    constexpr Span operator-(Instant o) const noexcept {
        return Span{static_cast<std::int64_t>(ns - o.ns)};
    }
};

inline std::string format_seconds(Span d) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9f", d.seconds());
    return buf;
}

}  // namespace tempo
