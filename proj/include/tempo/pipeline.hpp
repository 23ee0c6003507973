#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tempo/dist.hpp"
#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

enum class LatencyScaling {
    fixed,    // sampled value is the stage span in seconds
    per_bit,  // sampled value is seconds per bit, scaled by the input size
};

struct StageSpec {
    std::string name;
    DistSpec latency{DistSpec::deterministic(0.0)};
    LatencyScaling scaling{LatencyScaling::fixed};
    double output_ratio{1.0};  // output_size = round(input_size * ratio)

    void validate() const {
        latency.validate();
        if (!(output_ratio >= 0.0))
            throw InvalidDistribution("output ratio must be >= 0");
    }

    std::uint64_t output_bits(std::uint64_t input_bits) const {
        return static_cast<std::uint64_t>(
            std::llround(static_cast<double>(input_bits) * output_ratio));
    }

    Span sample_span(std::uint64_t input_bits, RngStream& rng, double factor = 1.0) const {
        double v = latency.sample(rng) * factor;
        if (scaling == LatencyScaling::per_bit) v *= static_cast<double>(input_bits);
        return Span::from_seconds(v);
    }

    double min_span_s(std::uint64_t input_bits) const {
        double v = latency.min_support();
        if (scaling == LatencyScaling::per_bit) v *= static_cast<double>(input_bits);
        return v;
    }

    double max_span_s(std::uint64_t input_bits) const {
        double v = latency.max_support();
        if (scaling == LatencyScaling::per_bit) v *= static_cast<double>(input_bits);
        return v;
    }
};

// Cross-stage dependency: when the trigger stage raises its flag, the
// target stage runs with its latency scaled, at the price of a fixed
// metadata exchange added to the total. fire_prob 0 draws nothing, so a
// coupled cascade that never fires consumes exactly the same stream as the
// independent composition.
struct CouplingSpec {
    std::size_t trigger_stage{0};
    std::size_t target_stage{0};
    double fire_prob{0.0};
    Span metadata_latency{Span::zero()};
    double latency_factor{1.0};
};

struct StageResult {
    std::string name;
    Span span{Span::zero()};
    std::uint64_t input_bits{0};
    std::uint64_t output_bits{0};
};

struct CascadeResult {
    Span total{Span::zero()};
    std::vector<StageResult> stages;
    bool coupling_fired{false};
};

namespace detail {

inline CascadeResult run_cascade(const std::vector<StageSpec>& stages,
                                 std::uint64_t input_bits, RngStream& rng,
                                 const CouplingSpec* coupling) {
    if (stages.empty()) throw InvalidDistribution("cascade needs at least one stage");
    for (const auto& s : stages) s.validate();

    bool fired = false;
    if (coupling) {
        if (coupling->trigger_stage >= stages.size() ||
            coupling->target_stage >= stages.size())
            throw InvalidDistribution("coupling references a missing stage");
        if (coupling->fire_prob >= 1.0)
            fired = true;
        else if (coupling->fire_prob > 0.0)
            fired = rng.bernoulli(coupling->fire_prob);
    }

    CascadeResult out;
    out.coupling_fired = fired;
    std::uint64_t bits = input_bits;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        double factor = 1.0;
        if (fired && coupling && i == coupling->target_stage)
            factor = coupling->latency_factor;
        StageResult sr;
        sr.name = stages[i].name;
        sr.input_bits = bits;
        sr.span = stages[i].sample_span(bits, rng, factor);
        bits = stages[i].output_bits(bits);
        sr.output_bits = bits;
        out.total += sr.span;
        out.stages.push_back(std::move(sr));
    }
    if (fired && coupling) out.total += coupling->metadata_latency;
    return out;
}

}  // namespace detail

// End-to-end span is the exact integer sum of per-stage spans; sizes chain
// through the output ratios.
inline CascadeResult compose_independent(const std::vector<StageSpec>& stages,
                                         std::uint64_t input_bits, RngStream& rng) {
    return detail::run_cascade(stages, input_bits, rng, nullptr);
}

inline CascadeResult compose_coupled(const std::vector<StageSpec>& stages,
                                     const CouplingSpec& coupling, std::uint64_t input_bits,
                                     RngStream& rng) {
    return detail::run_cascade(stages, input_bits, rng, &coupling);
}

// Replaces the adjacent pair (merge_at, merge_at + 1) with one jointly
// optimized stage. Accepted only when the merged span cannot exceed the
// split pair's span on any realization: its maximum support must stay
// within the pair's summed minimum supports, sizes evaluated on this
// cascade's deterministic size chain.
inline CascadeResult compose_merged(const std::vector<StageSpec>& stages,
                                    std::size_t merge_at, const StageSpec& merged,
                                    std::uint64_t input_bits, RngStream& rng) {
    if (stages.size() < 2 || merge_at + 1 >= stages.size())
        throw InvalidDistribution("merge needs an adjacent stage pair");
    for (const auto& s : stages) s.validate();
    merged.validate();

    std::uint64_t bits = input_bits;
    for (std::size_t i = 0; i < merge_at; ++i) bits = stages[i].output_bits(bits);
    const std::uint64_t pair_in = bits;
    const std::uint64_t mid = stages[merge_at].output_bits(pair_in);

    double split_min =
        stages[merge_at].min_span_s(pair_in) + stages[merge_at + 1].min_span_s(mid);
    double merged_max = merged.max_span_s(pair_in);
    if (!(merged_max <= split_min))
        throw MergedNotDominant("merged stage span can exceed the split pair");

    std::vector<StageSpec> reduced;
    reduced.reserve(stages.size() - 1);
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (i == merge_at) {
            reduced.push_back(merged);
            ++i;  // skip the second half of the pair
        } else {
            reduced.push_back(stages[i]);
        }
    }
    return detail::run_cascade(reduced, input_bits, rng, nullptr);
}

// Sample correlation between two stages' spans across n independent runs of
// the cascade. Values near zero back the conditional-independence reading
// of the stage decomposition.
inline double stage_span_correlation(const std::vector<StageSpec>& stages, std::size_t i,
                                     std::size_t j, std::size_t n, RngStream& rng,
                                     std::uint64_t input_bits) {
    if (i >= stages.size() || j >= stages.size())
        throw InvalidDistribution("correlation stage index out of range");
    if (n < 2) throw EmptySample("need at least two samples");
    std::vector<double> xs(n), ys(n);
    for (std::size_t t = 0; t < n; ++t) {
        CascadeResult r = compose_independent(stages, input_bits, rng);
        xs[t] = r.stages[i].span.seconds();
        ys[t] = r.stages[j].span.seconds();
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        mx += xs[t];
        my += ys[t];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sxy += (xs[t] - mx) * (ys[t] - my);
        sxx += (xs[t] - mx) * (xs[t] - mx);
        syy += (ys[t] - my) * (ys[t] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace tempo
