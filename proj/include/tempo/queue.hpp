#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/source.hpp"

namespace tempo {

enum class QueueKind {
    fcfs,
    lcfs_preempt,
    purge_replace,
    queue_and_reorder,
};

enum class DropPolicy {
    drop_newest,
    drop_oldest,
};

struct QueueSpec {
    QueueKind kind{QueueKind::fcfs};
    std::uint64_t capacity{0};  // waiting-room size, 0 = unbounded (fcfs only)
    DropPolicy on_full{DropPolicy::drop_newest};

    static QueueSpec fcfs(std::uint64_t capacity = 0,
                          DropPolicy on_full = DropPolicy::drop_newest) {
        QueueSpec q;
        q.kind = QueueKind::fcfs;
        q.capacity = capacity;
        q.on_full = on_full;
        return q;
    }
    static QueueSpec lcfs_preempt() { return QueueSpec{QueueKind::lcfs_preempt, 0, {}}; }
    static QueueSpec purge_replace() { return QueueSpec{QueueKind::purge_replace, 0, {}}; }
    static QueueSpec queue_and_reorder() {
        return QueueSpec{QueueKind::queue_and_reorder, 0, {}};
    }
};

// What an offer did: packets evicted from the waiting room, and whether the
// new arrival should preempt an in-flight transmission (lcfs_preempt only;
// the server owns the in-flight packet, so the caller performs the
// preemption and discards the victim).
struct OfferResult {
    bool accepted{true};
    std::vector<Packet> dropped;
    std::vector<Packet> purged;
    bool preempt_service{false};
};

// Waiting room in front of a single server. Service-order policy lives in
// pop_next(); admission policy in offer().
class TxQueue {
public:
    explicit TxQueue(QueueSpec spec) : spec_(spec) {}

    const QueueSpec& spec() const { return spec_; }
    std::size_t waiting() const { return buf_.size(); }

    OfferResult offer(Packet p, bool server_busy) {
        OfferResult r;
        switch (spec_.kind) {
            case QueueKind::fcfs:
                if (spec_.capacity != 0 && buf_.size() >= spec_.capacity) {
                    if (spec_.on_full == DropPolicy::drop_newest) {
                        r.accepted = false;
                        r.dropped.push_back(std::move(p));
                    } else {
                        r.dropped.push_back(std::move(buf_.front()));
                        buf_.pop_front();
                        buf_.push_back(std::move(p));
                    }
                } else {
                    buf_.push_back(std::move(p));
                }
                break;
            case QueueKind::lcfs_preempt:
                buf_.push_front(std::move(p));
                r.preempt_service = server_busy;
                break;
            case QueueKind::purge_replace:
                // At most one waiting packet; the freshest wins.
                while (!buf_.empty()) {
                    r.purged.push_back(std::move(buf_.front()));
                    buf_.pop_front();
                }
                buf_.push_back(std::move(p));
                break;
            case QueueKind::queue_and_reorder:
                buf_.push_back(std::move(p));
                break;
        }
        return r;
    }

    std::optional<Packet> pop_next() {
        if (buf_.empty()) return std::nullopt;
        switch (spec_.kind) {
            case QueueKind::fcfs:
            case QueueKind::purge_replace: {
                Packet p = std::move(buf_.front());
                buf_.pop_front();
                return p;
            }
            case QueueKind::lcfs_preempt: {
                Packet p = std::move(buf_.front());
                buf_.pop_front();
                return p;
            }
            case QueueKind::queue_and_reorder: {
                // Freshest first; older backlog follows when the link is idle.
                auto it = std::max_element(buf_.begin(), buf_.end(),
                                           [](const Packet& x, const Packet& y) {
                                               if (x.generated_at != y.generated_at)
                                                   return x.generated_at < y.generated_at;
                                               return x.seq < y.seq;
                                           });
                Packet p = std::move(*it);
                buf_.erase(it);
                return p;
            }
        }
        return std::nullopt;
    }

private:
    QueueSpec spec_;
    std::deque<Packet> buf_;
};

}  // namespace tempo
