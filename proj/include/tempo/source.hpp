#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tempo/dist.hpp"
#include "tempo/errors.hpp"
#include "tempo/process.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

struct Packet {
    std::uint64_t seq{0};
    Instant generated_at{Instant::origin()};
    std::uint64_t size_bits{0};
    std::vector<double> sample;  // process observation, empty if none
};

enum class SourceKind {
    periodic,
    poisson,
    event_threshold,
};

struct SourceSpec {
    SourceKind kind{SourceKind::periodic};
    Span period{Span::from_millis(100.0)};   // periodic
    double rate_per_s{1.0};                  // poisson
    double threshold{1.0};                   // event_threshold: deviation that triggers
    Span tick{Span::from_millis(1.0)};       // event_threshold: detection grid
    std::uint64_t size_bits{1000};

    static SourceSpec periodic_every(Span period, std::uint64_t size_bits = 1000) {
        SourceSpec s;
        s.kind = SourceKind::periodic;
        s.period = period;
        s.size_bits = size_bits;
        s.validate();
        return s;
    }

    static SourceSpec poisson_rate(double rate_per_s, std::uint64_t size_bits = 1000) {
        SourceSpec s;
        s.kind = SourceKind::poisson;
        s.rate_per_s = rate_per_s;
        s.size_bits = size_bits;
        s.validate();
        return s;
    }

    static SourceSpec on_deviation(double threshold, Span tick = Span::from_millis(1.0),
                                   std::uint64_t size_bits = 1000) {
        SourceSpec s;
        s.kind = SourceKind::event_threshold;
        s.threshold = threshold;
        s.tick = tick;
        s.size_bits = size_bits;
        s.validate();
        return s;
    }

    void validate() const {
        switch (kind) {
            case SourceKind::periodic:
                if (period.ns <= 0) throw InvalidDistribution("period must be > 0");
                break;
            case SourceKind::poisson:
                if (!(rate_per_s > 0.0)) throw InvalidDistribution("rate must be > 0");
                break;
            case SourceKind::event_threshold:
                if (!(threshold > 0.0)) throw InvalidDistribution("threshold must be > 0");
                if (tick.ns <= 0) throw InvalidDistribution("tick must be > 0");
                break;
        }
        if (size_bits == 0) throw InvalidDistribution("packet size must be > 0 bits");
    }
};

// Stateful generation-instant iterator. For timer-driven sources next()
// returns the following instant strictly after `now`. Event-threshold
// sources are driven by the process they watch: next() walks the detection
// tick grid, evolving the process, until the deviation from the last
// sampled value reaches the threshold. A constant process therefore never
// fires and next() is empty.
class SourceGen {
public:
    SourceGen(SourceSpec spec, ProcessModel* watched = nullptr)
        : spec_(spec), process_(watched) {
        if (spec_.kind == SourceKind::event_threshold) {
            if (!process_)
                throw InvalidDistribution("event_threshold source needs a process");
            anchor_value_ = process_->state;
        }
    }

    const SourceSpec& spec() const { return spec_; }

    std::optional<Instant> next(Instant now, RngStream& rng, Instant hard_stop) {
        switch (spec_.kind) {
            case SourceKind::periodic:
                return now + spec_.period;
            case SourceKind::poisson: {
                double gap = -std::log(rng.next_unit_open()) / spec_.rate_per_s;
                Span d = Span::from_seconds(gap);
                if (d.ns < 1) d.ns = 1;
                return now + d;
            }
            case SourceKind::event_threshold: {
                Instant t = cursor_ < now ? now : cursor_;
                while (true) {
                    t += spec_.tick;
                    if (t > hard_stop) {
                        cursor_ = t;
                        return std::nullopt;
                    }
                    process_->evolve(spec_.tick, rng);
                    if (process_->kind == ProcessKind::constant) {
                        cursor_ = hard_stop;
                        return std::nullopt;
                    }
                    double dev = std::sqrt(
                        ProcessModel::sq_error(process_->state, anchor_value_));
                    if (dev >= spec_.threshold) {
                        cursor_ = t;
                        anchor_value_ = process_->state;
                        return t;
                    }
                }
            }
        }
        return std::nullopt;
    }

private:
    SourceSpec spec_;
    ProcessModel* process_;
    std::vector<double> anchor_value_;
    Instant cursor_{Instant::origin()};
};

// Convenience used by metric code: the instants a periodic or Poisson spec
// produces inside a window, first event one interval past the window start.
inline std::vector<Instant> generation_instants(const SourceSpec& spec, Instant from,
                                                Instant to, RngStream& rng) {
    std::vector<Instant> out;
    SourceGen gen(spec);
    Instant t = from;
    while (true) {
        auto nxt = gen.next(t, rng, to);
        if (!nxt || *nxt > to) break;
        out.push_back(*nxt);
        t = *nxt;
    }
    return out;
}

}  // namespace tempo
