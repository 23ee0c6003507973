#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

struct TraceRow {
    std::uint64_t t_ns;
    std::string entity;
    std::string event;
    std::string detail;
};

// Optional event log. Disabled by default so the hot path costs one branch.
class TraceLog {
public:
    void enable(bool on = true) { enabled_ = on; }
    bool enabled() const { return enabled_; }

    void record(Instant t, std::string_view entity, std::string_view event,
                std::string detail = {}) {
        if (!enabled_) return;
        rows_.push_back(TraceRow{t.ns, std::string(entity), std::string(event),
                                 std::move(detail)});
    }

    const std::vector<TraceRow>& rows() const { return rows_; }

private:
    bool enabled_{false};
    std::vector<TraceRow> rows_;
};

using EventId = std::uint64_t;

// Single-threaded event scheduler. Events fire in (fire_at, insertion seq)
// order; ties on the timestamp therefore resolve in scheduling order, which
// keeps runs reproducible. run_until is horizon inclusive: an event placed
// exactly at the horizon is dispatched before the call returns.
class Engine {
public:
    using Handler = std::function<void()>;

    explicit Engine(std::uint64_t seed = 0) : seed_(seed) {}

    Instant now() const { return now_; }
    std::uint64_t seed() const { return seed_; }
    TraceLog& trace() { return trace_; }
    const TraceLog& trace() const { return trace_; }

    RngStream stream(std::string_view label) const { return RngStream(seed_, label); }

    EventId schedule_at(Instant t, Handler fn) {
        if (t < now_)
            throw SchedulingInPast("event at t=" + std::to_string(t.ns) +
                                   "ns is before now=" + std::to_string(now_.ns) + "ns");
        EventId id = next_seq_++;
        heap_.push_back(Node{t, id, std::move(fn)});
        std::push_heap(heap_.begin(), heap_.end(), Later{});
        return id;
    }

    EventId schedule_after(Span d, Handler fn) {
        return schedule_at(now_ + d, std::move(fn));
    }

    // Lazy cancellation: the node stays queued but is skipped on pop.
    void cancel(EventId id) { cancelled_.insert(id); }

    bool pending() const { return heap_.size() > cancelled_.size(); }

    // Dispatches every live event with fire_at <= horizon, then parks the
    // clock at the horizon.
    std::uint64_t run_until(Instant horizon) {
        std::uint64_t dispatched = 0;
        while (!heap_.empty() && heap_.front().fire_at <= horizon) {
            std::pop_heap(heap_.begin(), heap_.end(), Later{});
            Node node = std::move(heap_.back());
            heap_.pop_back();
            if (!cancelled_.empty()) {
                auto it = cancelled_.find(node.id);
                if (it != cancelled_.end()) {
                    cancelled_.erase(it);
                    continue;
                }
            }
            now_ = node.fire_at;
            node.fn();
            ++dispatched;
        }
        now_ = horizon;
        return dispatched;
    }

private:
    struct Node {
        Instant fire_at;
        EventId id;
        Handler fn;
    };
    // Max-heap comparator inverted so the earliest (fire_at, id) pops first.
    struct Later {
        bool operator()(const Node& x, const Node& y) const {
            if (x.fire_at != y.fire_at) return x.fire_at > y.fire_at;
            return x.id > y.id;
        }
    };

    std::uint64_t seed_;
    Instant now_{Instant::origin()};
    EventId next_seq_{0};
    std::vector<Node> heap_;
    std::unordered_set<EventId> cancelled_;
    TraceLog trace_;
};

}  // namespace tempo
