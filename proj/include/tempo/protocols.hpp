#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempo/channel.hpp"
#include "tempo/engine.hpp"
#include "tempo/errors.hpp"
#include "tempo/process.hpp"
#include "tempo/queue.hpp"
#include "tempo/source.hpp"

namespace tempo {

enum class PacketFate : std::uint8_t {
    delivered,
    dropped_capacity,   // no room in the waiting line
    dropped_channel,    // failed attempt without retransmission
    purged,             // replaced by a fresher packet while waiting
    preempted,          // displaced mid-service and discarded
    in_flight,          // unresolved when the horizon hit
};

struct DeliveryRecord {
    std::uint64_t seq{0};
    Instant generated_at{Instant::origin()};
    std::uint64_t size_bits{0};
    std::optional<Instant> delivered_at;
    PacketFate fate{PacketFate::in_flight};
    std::uint32_t attempts{0};
    std::vector<double> sample;
};

struct Conservation {
    std::uint64_t generated{0};
    std::uint64_t delivered{0};
    std::uint64_t dropped_capacity{0};
    std::uint64_t dropped_channel{0};
    std::uint64_t purged{0};
    std::uint64_t preempted{0};
    std::uint64_t in_flight{0};

    bool reconciles() const {
        return generated == delivered + dropped_capacity + dropped_channel + purged +
                                preempted + in_flight;
    }
};

struct TrailPoint {
    Instant at;
    double value;
};

struct DeliveryTrace {
    std::vector<DeliveryRecord> records;  // indexed by seq
    Instant window_end{Instant::origin()};
    std::vector<TrailPoint> state_trail;  // exact two-state path when recorded

    Conservation conservation() const {
        Conservation c;
        c.generated = records.size();
        for (const auto& r : records) {
            switch (r.fate) {
                case PacketFate::delivered: ++c.delivered; break;
                case PacketFate::dropped_capacity: ++c.dropped_capacity; break;
                case PacketFate::dropped_channel: ++c.dropped_channel; break;
                case PacketFate::purged: ++c.purged; break;
                case PacketFate::preempted: ++c.preempted; break;
                case PacketFate::in_flight: ++c.in_flight; break;
            }
        }
        return c;
    }

    // Receiver-side view for queue_and_reorder consumers.
    std::vector<const DeliveryRecord*> reordered_deliveries() const {
        std::vector<const DeliveryRecord*> out;
        for (const auto& r : records)
            if (r.fate == PacketFate::delivered) out.push_back(&r);
        std::sort(out.begin(), out.end(), [](const DeliveryRecord* a, const DeliveryRecord* b) {
            return a->generated_at < b->generated_at;
        });
        return out;
    }
};

struct OneWayConfig {
    SourceSpec source;
    QueueSpec queue;
    Channel channel;
    bool retransmit{true};
    std::optional<ProcessModel> process;  // packets observe this if present
    std::string channel_stream_label{"channel"};
};

// One source, one queue, one link, one receiver. Returns every packet's
// fate plus, when the source observes a two-state process, the exact state
// path (flip instants are simulated as events of their own).
inline DeliveryTrace run_one_way(const OneWayConfig& cfg, std::uint64_t seed, Span horizon,
                                 TraceLog* trace_out = nullptr) {
    cfg.source.validate();
    validate(cfg.channel);

    Engine eng(seed);
    if (trace_out) eng.trace().enable();
    const Instant end = Instant::origin() + horizon;

    RngStream src_rng = eng.stream("source");
    RngStream ch_rng = eng.stream(cfg.channel_stream_label);
    RngStream proc_rng = eng.stream("process");

    DeliveryTrace out;
    out.window_end = end;

    ProcessModel proc;
    bool has_proc = cfg.process.has_value();
    if (has_proc) proc = *cfg.process;
    Instant proc_at = Instant::origin();
    bool flip_driven = has_proc && proc.kind == ProcessKind::two_state_markov &&
                       cfg.source.kind != SourceKind::event_threshold;

    struct Srv {
        bool busy{false};
        std::uint64_t seq{0};
        EventId completion{0};
    } srv;
    TxQueue q(cfg.queue);
    SourceGen gen(cfg.source, has_proc ? &proc : nullptr);

    auto sample_now = [&](Instant t) -> std::vector<double> {
        if (!has_proc) return {};
        if (!flip_driven && cfg.source.kind != SourceKind::event_threshold) {
            proc.evolve(t - proc_at, proc_rng);
            proc_at = t;
        }
        return proc.state;
    };

    // Service loop. Attempts repeat on failure when retransmission is on;
    // otherwise a failed attempt drops the packet. Both closures live until
    // run_until returns, so reference captures stay valid across events.
    std::function<void()> start_service;
    std::function<void()> attempt;
    attempt = [&] {
        Attempt a = sample_attempt(cfg.channel, out.records[srv.seq].size_bits, ch_rng);
        ++out.records[srv.seq].attempts;
        srv.completion = eng.schedule_after(a.duration, [&, ok = a.success] {
            DeliveryRecord& rec = out.records[srv.seq];
            if (ok) {
                rec.delivered_at = eng.now();
                rec.fate = PacketFate::delivered;
                eng.trace().record(eng.now(), "receiver", "deliver",
                                   "seq=" + std::to_string(rec.seq));
            } else if (cfg.retransmit) {
                eng.trace().record(eng.now(), "channel", "attempt_failed",
                                   "seq=" + std::to_string(rec.seq));
                attempt();
                return;
            } else {
                rec.fate = PacketFate::dropped_channel;
                eng.trace().record(eng.now(), "channel", "drop",
                                   "seq=" + std::to_string(rec.seq));
            }
            srv.busy = false;
            start_service();
        });
    };
    start_service = [&] {
        auto nxt = q.pop_next();
        if (!nxt) return;
        srv.busy = true;
        srv.seq = nxt->seq;
        attempt();
    };

    auto on_generate = [&](Instant t) {
        std::uint64_t seq = out.records.size();
        Packet p;
        p.seq = seq;
        p.generated_at = t;
        p.size_bits = cfg.source.size_bits;
        p.sample = sample_now(t);
        DeliveryRecord rec;
        rec.seq = seq;
        rec.generated_at = t;
        rec.size_bits = p.size_bits;
        rec.sample = p.sample;
        out.records.push_back(std::move(rec));
        eng.trace().record(t, "source", "generate", "seq=" + std::to_string(seq));

        OfferResult r = q.offer(std::move(p), srv.busy);
        for (auto& d : r.dropped) {
            out.records[d.seq].fate = PacketFate::dropped_capacity;
            eng.trace().record(t, "queue", "drop_capacity", "seq=" + std::to_string(d.seq));
        }
        for (auto& d : r.purged) {
            out.records[d.seq].fate = PacketFate::purged;
            eng.trace().record(t, "queue", "purge", "seq=" + std::to_string(d.seq));
        }
        if (r.preempt_service && srv.busy) {
            eng.cancel(srv.completion);
            out.records[srv.seq].fate = PacketFate::preempted;
            eng.trace().record(t, "queue", "preempt", "seq=" + std::to_string(srv.seq));
            srv.busy = false;
        }
        if (!srv.busy) start_service();
    };

    // Exact flip process for two-state sources.
    std::function<void()> flip_loop = [&] {
        double gap = -std::log(proc_rng.next_unit_open()) / proc.flip_rate;
        Span d = Span::from_seconds(gap);
        if (d.ns < 1) d.ns = 1;
        Instant at = eng.now() + d;
        if (at > end) return;
        eng.schedule_at(at, [&] {
            proc.state[0] = 1.0 - proc.state[0];
            out.state_trail.push_back({eng.now(), proc.state[0]});
            eng.trace().record(eng.now(), "process", "flip",
                               "state=" + std::to_string(proc.state[0]));
            flip_loop();
        });
    };
    if (flip_driven) {
        out.state_trail.push_back({Instant::origin(), proc.state[0]});
        flip_loop();
    }

    // Generation chain. A periodic source emits its first sample at t=0, so
    // a horizon of k periods yields k+1 samples.
    std::function<void(Instant)> chain = [&](Instant from) {
        auto nxt = gen.next(from, src_rng, end);
        if (!nxt || *nxt > end) return;
        Instant g = *nxt;
        eng.schedule_at(g, [&, g] {
            on_generate(g);
            chain(g);
        });
    };
    if (cfg.source.kind == SourceKind::periodic) {
        eng.schedule_at(Instant::origin(), [&] {
            on_generate(Instant::origin());
            chain(Instant::origin());
        });
    } else {
        chain(Instant::origin());
    }

    eng.run_until(end);
    if (trace_out) *trace_out = std::move(eng.trace());
    return out;
}

// Two-way exchange with a rate split: a round of L channel uses carries the
// data leg in the first k fraction and the acknowledgment in the rest, so a
// round always lasts t_RTT = L / (2B) regardless of k. Rounds repeat until
// data and ack both get through. Pull mode prepends a request leg and
// anchors the measurement at the request emission; a lost request times out
// after one t_RTT and is resent.
enum class TwoWayMode { push, pull };

struct TwoWayConfig {
    ShannonChannel channel;
    TwoWayMode mode{TwoWayMode::push};
    std::uint64_t data_bits{1000};
    std::uint64_t ack_bits{100};
    std::uint64_t request_bits{100};
    double split_k{0.5};
    std::uint64_t round_channel_uses{1000};
    // Leg success probabilities; negative means "derive from channel".
    double data_success{-1.0};
    double ack_success{-1.0};
    double request_success{-1.0};

    void validate() const {
        channel.validate();
        if (!(split_k > 0.0) || !(split_k < 1.0))
            throw InvalidSplit("split k must lie in (0, 1)");
        if (round_channel_uses == 0)
            throw InvalidSplit("round must span at least one channel use");
        for (double p : {data_success, ack_success, request_success})
            if (p > 1.0) throw InvalidDistribution("leg success prob must be <= 1");
    }

    double leg_success(double configured) const {
        return configured < 0.0 ? 1.0 - channel.block_error_prob : configured;
    }

    Span t_rtt() const {
        return Span::from_seconds(static_cast<double>(round_channel_uses) /
                                  (2.0 * channel.bandwidth_hz));
    }

    // Bits per channel use on each leg under the split.
    std::pair<double, double> rates() const {
        double L = static_cast<double>(round_channel_uses);
        return {static_cast<double>(data_bits) / (split_k * L),
                static_cast<double>(ack_bits) / ((1.0 - split_k) * L)};
    }

    Span request_tx_time() const { return channel.tx_time(request_bits); }
};

struct RoundRecord {
    std::uint64_t seq{0};
    Instant anchor{Instant::origin()};
    std::uint32_t rounds{0};
    std::uint32_t request_tries{0};
    Instant completed_at{Instant::origin()};
};

struct RoundTrace {
    std::vector<RoundRecord> records;
    Span t_rtt{Span::zero()};
    double rate_data{0.0};
    double rate_ack{0.0};
};

inline RoundTrace run_two_way(const TwoWayConfig& cfg, std::uint64_t seed,
                              std::uint64_t transfers) {
    cfg.validate();
    RngStream rng(seed, "twoway");
    RoundTrace out;
    out.t_rtt = cfg.t_rtt();
    auto [rd, ra] = cfg.rates();
    out.rate_data = rd;
    out.rate_ack = ra;

    const double q_data = cfg.leg_success(cfg.data_success);
    const double q_ack = cfg.leg_success(cfg.ack_success);
    const double q_req = cfg.leg_success(cfg.request_success);
    const Span t_req = cfg.request_tx_time();

    Instant t = Instant::origin();
    for (std::uint64_t i = 0; i < transfers; ++i) {
        RoundRecord rec;
        rec.seq = i;
        rec.anchor = t;
        if (cfg.mode == TwoWayMode::pull) {
            // Each failed request costs its transmission plus a full RTT of
            // silence before the retry.
            while (true) {
                ++rec.request_tries;
                if (rng.bernoulli(q_req)) {
                    t += t_req;
                    break;
                }
                t += t_req + out.t_rtt;
            }
        }
        while (true) {
            ++rec.rounds;
            t += out.t_rtt;
            bool data_ok = rng.bernoulli(q_data);
            bool ack_ok = rng.bernoulli(q_ack);
            if (data_ok && ack_ok) break;
        }
        rec.completed_at = t;
        out.records.push_back(rec);
    }
    return out;
}

// Closed-loop cycle: state uplink, controller compute, command downlink.
// Cycles start at source instants and run independently of each other.
struct LoopConfig {
    SourceSpec source;
    Channel uplink;
    bool uplink_retransmit{true};
    Span controller_compute{Span::zero()};
    Channel downlink;
    bool downlink_retransmit{true};
};

struct LoopRecord {
    std::uint64_t cycle{0};
    Instant state_sent_at{Instant::origin()};
    std::optional<Instant> command_received_at;
};

struct LoopTrace {
    std::vector<LoopRecord> records;
    Instant window_end{Instant::origin()};
};

inline LoopTrace run_loop(const LoopConfig& cfg, std::uint64_t seed, Span horizon) {
    cfg.source.validate();
    validate(cfg.uplink);
    validate(cfg.downlink);
    const Instant end = Instant::origin() + horizon;

    RngStream src_rng(seed, "loop/source");
    RngStream up_rng(seed, "loop/uplink");
    RngStream down_rng(seed, "loop/downlink");

    auto leg = [end](const Channel& ch, bool retransmit, std::uint64_t bits, Instant from,
                     RngStream& rng) -> std::optional<Instant> {
        Instant t = from;
        while (t <= end) {
            Attempt a = sample_attempt(ch, bits, rng);
            t += a.duration;
            if (a.success) return t <= end ? std::optional<Instant>(t) : std::nullopt;
            if (!retransmit) return std::nullopt;
        }
        return std::nullopt;
    };

    LoopTrace out;
    out.window_end = end;
    SourceGen gen(cfg.source);
    Instant g = Instant::origin();
    std::uint64_t cycle = 0;
    bool first = cfg.source.kind == SourceKind::periodic;
    while (true) {
        if (first) {
            first = false;  // periodic sources emit at the origin too
        } else {
            auto nxt = gen.next(g, src_rng, end);
            if (!nxt || *nxt > end) break;
            g = *nxt;
        }
        LoopRecord rec;
        rec.cycle = cycle++;
        rec.state_sent_at = g;
        auto up = leg(cfg.uplink, cfg.uplink_retransmit, cfg.source.size_bits, g, up_rng);
        if (up) {
            Instant computed_at = *up + cfg.controller_compute;
            if (computed_at <= end) {
                auto down = leg(cfg.downlink, cfg.downlink_retransmit, cfg.source.size_bits,
                                computed_at, down_rng);
                if (down) rec.command_received_at = *down;
            }
        }
        out.records.push_back(rec);
    }
    return out;
}

// Completion instant of the K-th receiver, per packet sequence number.
struct MulticastRecord {
    std::uint64_t seq{0};
    Instant generated_at{Instant::origin()};
    std::optional<Span> completion;  // empty when fewer than K receivers got it
};

inline std::vector<MulticastRecord> multicast_completion(
    const std::vector<DeliveryTrace>& receivers, std::uint32_t k) {
    if (receivers.empty()) throw InvalidK("need at least one receiver");
    if (k < 1 || k > receivers.size())
        throw InvalidK("k must lie in [1, receiver count]");
    std::size_t n = 0;
    for (const auto& tr : receivers) n = std::max(n, tr.records.size());
    std::vector<MulticastRecord> out(n);
    std::vector<Instant> got;
    for (std::size_t s = 0; s < n; ++s) {
        got.clear();
        for (const auto& tr : receivers) {
            if (s < tr.records.size()) {
                out[s].seq = tr.records[s].seq;
                out[s].generated_at = tr.records[s].generated_at;
                if (tr.records[s].delivered_at) got.push_back(*tr.records[s].delivered_at);
            }
        }
        if (got.size() >= k) {
            std::nth_element(got.begin(), got.begin() + (k - 1), got.end());
            out[s].completion = got[k - 1] - out[s].generated_at;
        }
    }
    return out;
}

}  // namespace tempo
