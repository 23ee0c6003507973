#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tempo/dist.hpp"
#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

// Finite-blocklength style link: a packet of D bits at r bits per channel
// use occupies n = ceil(D / r) uses, each lasting 1/(2B) seconds, and the
// whole block fails independently with probability block_error_prob.
struct ShannonChannel {
    double bandwidth_hz{1.0};
    double block_error_prob{0.0};
    double bits_per_channel_use{1.0};

    void validate() const {
        if (!(bandwidth_hz > 0.0))
            throw InvalidDistribution("bandwidth must be > 0");
        if (block_error_prob < 0.0 || block_error_prob > 1.0)
            throw InvalidDistribution("block error prob must lie in [0, 1]");
        if (!(bits_per_channel_use > 0.0))
            throw InvalidDistribution("bits per channel use must be > 0");
    }

    std::uint64_t channel_uses(std::uint64_t size_bits) const {
        return static_cast<std::uint64_t>(
            std::ceil(static_cast<double>(size_bits) / bits_per_channel_use));
    }

    Span tx_time(std::uint64_t size_bits) const {
        double n = static_cast<double>(channel_uses(size_bits));
        return Span::from_seconds(n / (2.0 * bandwidth_hz));
    }
};

// Black-box link: per-attempt delay drawn from a distribution, success is
// Bernoulli. A failed attempt still occupies its drawn duration.
struct SampledChannel {
    DistSpec delay;
    double success_prob{1.0};

    void validate() const {
        delay.validate();
        if (success_prob < 0.0 || success_prob > 1.0)
            throw InvalidDistribution("success prob must lie in [0, 1]");
    }
};

using Channel = std::variant<ShannonChannel, SampledChannel>;

inline void validate(const Channel& ch) {
    std::visit([](const auto& c) { c.validate(); }, ch);
}

struct Attempt {
    Span duration;
    bool success;
};

// One transmission attempt. Durations are clamped to at least 1 ns so an
// attempt always advances the clock.
inline Attempt sample_attempt(const Channel& ch, std::uint64_t size_bits, RngStream& rng) {
    if (const auto* sh = std::get_if<ShannonChannel>(&ch)) {
        Span d = sh->tx_time(size_bits);
        if (d.ns < 1) d.ns = 1;
        bool ok = !rng.bernoulli(sh->block_error_prob);
        return Attempt{d, ok};
    }
    const auto& sc = std::get<SampledChannel>(ch);
    Span d = draw_span(rng, sc.delay);
    if (d.ns < 1) d.ns = 1;
    bool ok = rng.bernoulli(sc.success_prob);
    return Attempt{d, ok};
}

// Closed-form latency-reliability function F_D(tau): the probability that a
// packet of the given size is delivered within tau. Supported analytically
// for Shannon channels and for sampled channels with deterministic delay;
// anything else must go through the empirical estimator.
inline double latency_reliability(const Channel& ch, std::uint64_t size_bits, Span tau,
                                  bool retransmit) {
    double per_try_ns = 0.0;
    double success = 0.0;
    if (const auto* sh = std::get_if<ShannonChannel>(&ch)) {
        per_try_ns = static_cast<double>(sh->tx_time(size_bits).ns);
        success = 1.0 - sh->block_error_prob;
    } else {
        const auto& sc = std::get<SampledChannel>(ch);
        if (!sc.delay.is_deterministic())
            throw Unsupported("latency_reliability needs a deterministic delay");
        per_try_ns = static_cast<double>(Span::from_seconds(sc.delay.a).ns);
        success = sc.success_prob;
    }
    if (tau.ns < 0) return 0.0;
    if (per_try_ns < 1.0) per_try_ns = 1.0;
    if (!retransmit)
        return static_cast<double>(tau.ns) >= per_try_ns ? success : 0.0;
    double tries = std::floor(static_cast<double>(tau.ns) / per_try_ns);
    return 1.0 - std::pow(1.0 - success, tries);
}

// Right-continuous step estimate of F_D built from (delivery span, success)
// pairs. Failed samples count toward the denominator, so the curve plateaus
// at the overall success fraction.
class StepCurve {
public:
    StepCurve(std::vector<std::pair<Span, bool>> samples) {
        if (samples.empty()) throw EmptySample("empirical curve needs samples");
        total_ = samples.size();
        std::vector<std::int64_t> ok;
        ok.reserve(samples.size());
        for (const auto& [span, success] : samples)
            if (success) ok.push_back(span.ns);
        std::sort(ok.begin(), ok.end());
        breaks_.reserve(ok.size());
        std::size_t i = 0;
        while (i < ok.size()) {
            std::size_t j = i;
            while (j < ok.size() && ok[j] == ok[i]) ++j;
            breaks_.push_back({ok[i], static_cast<double>(j) / static_cast<double>(total_)});
            i = j;
        }
    }

    double eval(Span tau) const {
        // Largest breakpoint <= tau.
        auto it = std::upper_bound(
            breaks_.begin(), breaks_.end(), tau.ns,
            [](std::int64_t t, const Break& b) { return t < b.at_ns; });
        if (it == breaks_.begin()) return 0.0;
        return std::prev(it)->cum;
    }

    double plateau() const { return breaks_.empty() ? 0.0 : breaks_.back().cum; }

    struct Break {
        std::int64_t at_ns;
        double cum;
    };
    const std::vector<Break>& breakpoints() const { return breaks_; }

private:
    std::size_t total_{0};
    std::vector<Break> breaks_;
};

inline StepCurve empirical_latency_reliability(std::vector<std::pair<Span, bool>> samples) {
    return StepCurve(std::move(samples));
}

}  // namespace tempo
