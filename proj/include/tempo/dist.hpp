#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

enum class DistKind {
    deterministic,
    exponential,
    uniform,
    geometric_trials,
    empirical,
};

// Value-semantics distribution description. Parameters are in natural units
// of whatever quantity is being drawn (seconds for delays, counts for
// trials). validate() is called by the factories, so any instance obtained
// through them is well formed.
struct DistSpec {
    DistKind kind{DistKind::deterministic};
    double a{0.0};                 // value / rate / lower bound / success prob
    double b{0.0};                 // upper bound (uniform only)
    std::vector<double> samples;   // empirical only

    static DistSpec deterministic(double value) {
        DistSpec d;
        d.kind = DistKind::deterministic;
        d.a = value;
        d.validate();
        return d;
    }

    static DistSpec exponential(double rate) {
        DistSpec d;
        d.kind = DistKind::exponential;
        d.a = rate;
        d.validate();
        return d;
    }

    static DistSpec uniform(double lo, double hi) {
        DistSpec d;
        d.kind = DistKind::uniform;
        d.a = lo;
        d.b = hi;
        d.validate();
        return d;
    }

    static DistSpec geometric_trials(double success_prob) {
        DistSpec d;
        d.kind = DistKind::geometric_trials;
        d.a = success_prob;
        d.validate();
        return d;
    }

    static DistSpec empirical(std::vector<double> values) {
        DistSpec d;
        d.kind = DistKind::empirical;
        d.samples = std::move(values);
        d.validate();
        return d;
    }

    void validate() const {
        switch (kind) {
            case DistKind::deterministic:
                if (!std::isfinite(a))
                    throw InvalidDistribution("deterministic value must be finite");
                break;
            case DistKind::exponential:
                if (!(a > 0.0) || !std::isfinite(a))
                    throw InvalidDistribution("exponential rate must be > 0");
                break;
            case DistKind::uniform:
                if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
                    throw InvalidDistribution("uniform bounds must satisfy low <= high");
                break;
            case DistKind::geometric_trials:
                if (!(a > 0.0) || !(a <= 1.0))
                    throw InvalidDistribution("geometric success prob must lie in (0, 1]");
                break;
            case DistKind::empirical:
                if (samples.empty()) throw EmptySample("empirical distribution needs samples");
                break;
        }
    }

    double sample(RngStream& rng) const {
        switch (kind) {
            case DistKind::deterministic:
                return a;
            case DistKind::exponential:
                return -std::log(rng.next_unit_open()) / a;
            case DistKind::uniform:
                return a + (b - a) * rng.next_unit();
            case DistKind::geometric_trials: {
                // Number of Bernoulli(a) trials up to and including the first
                // success, by CDF inversion.
                if (a >= 1.0) return 1.0;
                double u = rng.next_unit_open();
                double k = std::ceil(std::log(u) / std::log1p(-a));
                return std::max(1.0, k);
            }
            case DistKind::empirical:
                return samples[static_cast<std::size_t>(
                    rng.next_below(static_cast<std::uint64_t>(samples.size())))];
        }
        return 0.0;
    }

    double min_support() const {
        switch (kind) {
            case DistKind::deterministic:
                return a;
            case DistKind::exponential:
                return 0.0;
            case DistKind::uniform:
                return a;
            case DistKind::geometric_trials:
                return 1.0;
            case DistKind::empirical:
                return *std::min_element(samples.begin(), samples.end());
        }
        return 0.0;
    }

    double max_support() const {
        switch (kind) {
            case DistKind::deterministic:
                return a;
            case DistKind::exponential:
                return std::numeric_limits<double>::infinity();
            case DistKind::uniform:
                return b;
            case DistKind::geometric_trials:
                return std::numeric_limits<double>::infinity();
            case DistKind::empirical:
                return *std::max_element(samples.begin(), samples.end());
        }
        return 0.0;
    }

    bool is_deterministic() const { return kind == DistKind::deterministic; }

    double mean() const {
        switch (kind) {
            case DistKind::deterministic:
                return a;
            case DistKind::exponential:
                return 1.0 / a;
            case DistKind::uniform:
                return 0.5 * (a + b);
            case DistKind::geometric_trials:
                return 1.0 / a;
            case DistKind::empirical: {
                double s = 0.0;
                for (double v : samples) s += v;
                return s / static_cast<double>(samples.size());
            }
        }
        return 0.0;
    }
};

inline double draw(RngStream& rng, const DistSpec& dist) { return dist.sample(rng); }

// Draw a duration in seconds and convert to integer nanoseconds.
inline Span draw_span(RngStream& rng, const DistSpec& dist) {
    return Span::from_seconds(dist.sample(rng));
}

}  // namespace tempo
