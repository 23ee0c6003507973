#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/process.hpp"
#include "tempo/protocols.hpp"
#include "tempo/source.hpp"
#include "tempo/summary.hpp"
#include "tempo/time.hpp"

namespace tempo {

struct Reception {
    Instant delivered_at;
    Instant anchor;  // generation instant of the delivered sample
};

// Piecewise-linear age process reconstructed from receptions. The age at
// time t is t minus the freshest anchor delivered by t; receptions whose
// anchor does not beat the current freshest one are stale and leave the
// process untouched. The measurement window starts at the first fresh
// reception unless age_from_origin is set, in which case age ramps from
// zero at t=0 (nothing known yet counts as born at the origin).
class AoIProcess {
public:
    struct Drop {
        Instant at;
        Span before;  // age approaching the reception, i.e. the peak
        Span after;   // age right after, delivered_at - anchor
    };

    static AoIProcess from_receptions(std::vector<Reception> rs, Instant window_end,
                                      bool age_from_origin = false) {
        std::sort(rs.begin(), rs.end(), [](const Reception& a, const Reception& b) {
            if (a.delivered_at != b.delivered_at) return a.delivered_at < b.delivered_at;
            return a.anchor < b.anchor;
        });
        AoIProcess p;
        p.end_ = window_end;
        std::optional<Instant> freshest;
        for (const Reception& r : rs) {
            if (r.delivered_at > window_end) break;
            if (freshest && r.anchor <= *freshest) continue;  // stale
            Drop d;
            d.at = r.delivered_at;
            if (p.drops_.empty()) {
                d.before = age_from_origin ? r.delivered_at - Instant::origin()
                                           : Span::zero();
            } else {
                const Drop& prev = p.drops_.back();
                d.before = prev.after + (r.delivered_at - prev.at);
            }
            d.after = r.delivered_at - r.anchor;
            freshest = r.anchor;
            p.drops_.push_back(d);
        }
        if (p.drops_.empty() && !age_from_origin) throw NoDeliveries("no receptions");
        p.start_ = age_from_origin ? Instant::origin()
                                   : p.drops_.front().at;
        if (p.end_ < p.start_) p.end_ = p.start_;
        return p;
    }

    static AoIProcess from_trace(const DeliveryTrace& trace, bool age_from_origin = false) {
        std::vector<Reception> rs;
        rs.reserve(trace.records.size());
        for (const auto& rec : trace.records)
            if (rec.delivered_at)
                rs.push_back(Reception{*rec.delivered_at, rec.generated_at});
        return from_receptions(std::move(rs), trace.window_end, age_from_origin);
    }

    Instant window_start() const { return start_; }
    Instant window_end() const { return end_; }
    const std::vector<Drop>& drops() const { return drops_; }

    // Exact time average over the window: every sawtooth segment integrates
    // to len * (2*a0 + len) / 2 in integer nanoseconds, accumulated in
    // 128-bit arithmetic before a single long-double division.
    double mean_seconds() const {
        if (end_ == start_) return 0.0;
        unsigned __int128 twice_area = 0;
        Instant t = start_;
        Span age = Span::zero();
        auto segment = [&](Instant upto) {
            unsigned __int128 len = static_cast<std::uint64_t>((upto - t).ns);
            unsigned __int128 a0 = static_cast<std::uint64_t>(age.ns);
            twice_area += len * (2 * a0 + len);
        };
        for (const Drop& d : drops_) {
            if (d.at > t) {
                segment(d.at);
                t = d.at;
            }
            age = d.after;
        }
        if (end_ > t) segment(end_);
        long double area2 = static_cast<long double>(twice_area);
        long double dur = static_cast<long double>((end_ - start_).ns);
        return static_cast<double>(area2 / (2.0L * dur) * 1e-9L);
    }

    // Peak ages, defined from the second reception on: the first reception
    // has no preceding sawtooth ramp of its own.
    std::vector<Span> peaks() const {
        if (drops_.size() < 2)
            throw InsufficientDeliveries("peak age needs at least two receptions");
        std::vector<Span> out;
        out.reserve(drops_.size() - 1);
        for (std::size_t i = 1; i < drops_.size(); ++i) out.push_back(drops_[i].before);
        return out;
    }

    // Age at an arbitrary instant inside the window (right-continuous at
    // receptions).
    Span age_at(Instant t) const {
        auto it = std::upper_bound(drops_.begin(), drops_.end(), t,
                                   [](Instant x, const Drop& d) { return x < d.at; });
        if (it == drops_.begin()) return t - start_;
        const Drop& d = *std::prev(it);
        return d.after + (t - d.at);
    }

private:
    std::vector<Drop> drops_;
    Instant start_{Instant::origin()};
    Instant end_{Instant::origin()};
};

inline double mean_aoi_seconds(const DeliveryTrace& trace, bool age_from_origin = false) {
    return AoIProcess::from_trace(trace, age_from_origin).mean_seconds();
}

inline SampleSummary peak_aoi(const DeliveryTrace& trace) {
    return summarize_spans(AoIProcess::from_trace(trace).peaks());
}

// Age sampled at query instants. Queries are generated by a periodic or
// Poisson spec over the whole timeline; ones that land before the first
// reception carry no defined age and are skipped.
inline SampleSummary query_aoi(const AoIProcess& proc, const std::vector<Instant>& queries) {
    SampleSummary s;
    for (Instant q : queries) {
        if (q < proc.window_start() || q > proc.window_end()) continue;
        s.add(proc.age_at(q).seconds());
    }
    if (s.count() == 0) throw NoQueriesInWindow("no query instants inside the window");
    return s;
}

inline SampleSummary query_aoi(const AoIProcess& proc, const SourceSpec& query_spec,
                               RngStream& rng) {
    if (query_spec.kind == SourceKind::event_threshold)
        throw InvalidDistribution("queries must be periodic or poisson");
    std::vector<Instant> qs =
        generation_instants(query_spec, Instant::origin(), proc.window_end(), rng);
    return query_aoi(proc, qs);
}

// Age of incorrect information for a two-state source: the time since the
// receiver's held estimate last matched the true state. Matches happen on
// delivery of a correct sample and also when the source flips back to the
// held value. Measured from the first delivery; the window start counts as
// the last match, so the process starts at zero either way.
struct AoiiResult {
    double time_avg_s{0.0};
    double max_s{0.0};
};

inline AoiiResult aoii(const std::vector<TrailPoint>& state_trail,
                       const DeliveryTrace& trace) {
    if (state_trail.empty()) throw EmptySample("state trail is empty");
    struct Ev {
        Instant at;
        bool is_delivery;
        double value;
        Instant anchor;
    };
    std::vector<Ev> evs;
    for (const auto& rec : trace.records)
        if (rec.delivered_at && !rec.sample.empty())
            evs.push_back(Ev{*rec.delivered_at, true, rec.sample[0], rec.generated_at});
    if (evs.empty()) throw NoDeliveries("no sampled deliveries");
    for (std::size_t i = 1; i < state_trail.size(); ++i)
        evs.push_back(Ev{state_trail[i].at, false, state_trail[i].value, Instant::origin()});
    std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
        if (a.at != b.at) return a.at < b.at;
        return a.is_delivery < b.is_delivery;  // state change first
    });

    const Instant end = trace.window_end;
    double state = state_trail[0].value;
    std::optional<double> estimate;
    std::optional<Instant> freshest;
    std::optional<Instant> start;
    Instant last_match{Instant::origin()};
    Instant t{Instant::origin()};
    unsigned __int128 twice_area = 0;
    std::int64_t max_ns = 0;

    auto advance = [&](Instant upto) {
        if (!start || upto <= t) return;
        bool matched = estimate && *estimate == state;
        if (matched) {
            last_match = upto;
        } else {
            unsigned __int128 len = static_cast<std::uint64_t>((upto - t).ns);
            unsigned __int128 a0 = static_cast<std::uint64_t>((t - last_match).ns);
            twice_area += len * (2 * a0 + len);
            std::int64_t peak = (upto - last_match).ns;
            if (peak > max_ns) max_ns = peak;
        }
        t = upto;
    };

    for (const Ev& e : evs) {
        if (e.at > end) break;
        advance(e.at);
        if (e.is_delivery) {
            if (!freshest || e.anchor > *freshest) {
                freshest = e.anchor;
                estimate = e.value;
            }
            if (!start) {
                start = e.at;
                t = e.at;
                last_match = e.at;
            }
        } else {
            state = e.value;
        }
    }
    advance(end);

    if (!start) throw NoDeliveries("no delivery inside the window");
    AoiiResult r;
    long double dur = static_cast<long double>((end - *start).ns);
    if (dur > 0)
        r.time_avg_s = static_cast<double>(
            static_cast<long double>(twice_area) / (2.0L * dur) * 1e-9L);
    r.max_s = static_cast<double>(max_ns) * 1e-9;
    return r;
}

// Deadline conformance over every generated packet. A packet violates the
// deadline when it is not delivered within it (including never delivered).
// on_time additionally requires the latency to avoid arriving earlier than
// deadline - earliness_window.
struct DeadlineMetrics {
    double violation_prob{0.0};
    double timely_throughput_bits_per_s{0.0};
    double on_time_fraction{0.0};
    std::uint64_t generated{0};
    std::uint64_t within_deadline{0};
    std::uint64_t on_time{0};
};

inline DeadlineMetrics deadline_metrics(const DeliveryTrace& trace, Span deadline,
                                        Span earliness_window) {
    if (deadline.ns < 0 || earliness_window.ns < 0)
        throw InvalidDistribution("deadline and earliness window must be >= 0");
    DeadlineMetrics m;
    m.generated = trace.records.size();
    if (m.generated == 0) throw NoDeliveries("no packets generated");
    std::uint64_t timely_bits = 0;
    const Span floor = deadline - earliness_window;
    for (const auto& rec : trace.records) {
        if (!rec.delivered_at) continue;
        Span lat = *rec.delivered_at - rec.generated_at;
        if (lat <= deadline) {
            ++m.within_deadline;
            timely_bits += rec.size_bits;
            if (lat >= floor) ++m.on_time;
        }
    }
    double gen = static_cast<double>(m.generated);
    m.violation_prob = 1.0 - static_cast<double>(m.within_deadline) / gen;
    m.on_time_fraction = static_cast<double>(m.on_time) / gen;
    double window_s = (trace.window_end - Instant::origin()).seconds();
    if (window_s > 0)
        m.timely_throughput_bits_per_s = static_cast<double>(timely_bits) / window_s;
    return m;
}

// Hold-last estimation error against a recorded true path. Path points are
// assumed to lie on a uniform grid, so the per-point average is the Riemann
// time average. The curve buckets the squared error by the age of the held
// sample.
struct PathPoint {
    Instant at;
    std::vector<double> value;
};

struct AgeBin {
    double age_mid_s{0.0};
    double mean_g{0.0};
    std::uint64_t count{0};
};

struct EstimationResult {
    double time_avg_g{0.0};
    std::vector<AgeBin> curve;
    std::uint64_t samples{0};
};

class GAgeAccumulator {
public:
    GAgeAccumulator(Span bin_width, std::size_t nbins)
        : width_(bin_width), sum_(nbins, 0.0), n_(nbins, 0) {
        if (bin_width.ns <= 0 || nbins == 0)
            throw InvalidDistribution("bad age binning");
    }

    void add(Span age, double g) {
        total_g_ += g;
        ++total_n_;
        std::size_t b = static_cast<std::size_t>(age.ns / width_.ns);
        if (b >= sum_.size()) b = sum_.size() - 1;
        sum_[b] += g;
        ++n_[b];
    }

    EstimationResult result() const {
        EstimationResult r;
        r.samples = total_n_;
        if (total_n_) r.time_avg_g = total_g_ / static_cast<double>(total_n_);
        for (std::size_t b = 0; b < sum_.size(); ++b) {
            if (!n_[b]) continue;
            AgeBin bin;
            bin.age_mid_s = (static_cast<double>(b) + 0.5) * width_.seconds();
            bin.mean_g = sum_[b] / static_cast<double>(n_[b]);
            bin.count = n_[b];
            r.curve.push_back(bin);
        }
        return r;
    }

private:
    Span width_;
    std::vector<double> sum_;
    std::vector<std::uint64_t> n_;
    double total_g_{0.0};
    std::uint64_t total_n_{0};
};

inline EstimationResult estimation_error(const std::vector<PathPoint>& path,
                                         const DeliveryTrace& trace, Span bin_width,
                                         std::size_t nbins) {
    if (path.empty()) throw EmptySample("empty path");
    struct Del {
        Instant at;
        Instant anchor;
        const std::vector<double>* value;
    };
    std::vector<Del> dels;
    for (const auto& rec : trace.records)
        if (rec.delivered_at && !rec.sample.empty())
            dels.push_back(Del{*rec.delivered_at, rec.generated_at, &rec.sample});
    if (dels.empty()) throw NoDeliveries("no sampled deliveries");
    std::sort(dels.begin(), dels.end(),
              [](const Del& a, const Del& b) { return a.at < b.at; });

    GAgeAccumulator acc(bin_width, nbins);
    std::size_t di = 0;
    std::optional<Instant> freshest;
    const std::vector<double>* estimate = nullptr;
    for (const PathPoint& p : path) {
        while (di < dels.size() && dels[di].at <= p.at) {
            if (!freshest || dels[di].anchor > *freshest) {
                freshest = dels[di].anchor;
                estimate = dels[di].value;
            }
            ++di;
        }
        if (!estimate) continue;
        Span age = p.at - *freshest;
        acc.add(age, ProcessModel::sq_error(*estimate, p.value));
    }
    return acc.result();
}

// Closure spans of a control loop; loops still open at the horizon are
// counted but not summarized.
struct LoopAge {
    SampleSummary closed;
    std::uint64_t open{0};
};

inline LoopAge loop_age(const LoopTrace& trace) {
    LoopAge la;
    for (const auto& rec : trace.records) {
        if (rec.command_received_at)
            la.closed.add((*rec.command_received_at - rec.state_sent_at).seconds());
        else
            ++la.open;
    }
    if (la.closed.count() == 0) throw NoClosedLoops("no loop closed inside the horizon");
    return la;
}

}  // namespace tempo
