#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/rng.hpp"

namespace tempo {

// Round-based voter dynamics with budgeted pairwise contacts. Each round a
// random legal contact set is drawn (edges of the interaction graph, no
// node exceeding its contact budget), every node adopts the majority
// opinion among itself and its contacts, and ties keep the current opinion.
// Contacts also exchange gossip: per-peer records of the freshest round
// whose opinion they know, which is what the informed-round verdicts read.
struct ConsensusConfig {
    std::uint32_t n{6};
    std::uint32_t contact_budget{2};
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // empty = complete
    std::vector<std::uint8_t> initial;                           // opinions, 0 or 1
    std::uint32_t initiator{0};
    std::uint32_t max_rounds{1000};
    std::vector<std::uint8_t> stubborn;  // optional, size n

    void validate() const {
        if (n == 0) throw ValidationError("need at least one voter");
        if (initial.size() != n) throw ValidationError("initial opinions must cover all voters");
        if (initiator >= n) throw ValidationError("initiator out of range");
        if (!stubborn.empty() && stubborn.size() != n)
            throw ValidationError("stubborn flags must cover all voters");
        for (auto [a, b] : edges)
            if (a >= n || b >= n || a == b) throw ValidationError("bad edge");
    }
};

struct ConsensusVerdict {
    // First round after which every node holds the same opinion (0 when the
    // initial opinions already agree). The genie sees this immediately.
    std::optional<std::uint32_t> birdseye_round;
    // First round at which the initiator has heard, directly or through
    // gossip, a post-agreement opinion of every node.
    std::optional<std::uint32_t> initiator_round;
    // First round at which every node has such records: the weaker "all
    // nodes informed" reading of shared knowledge of the consensus.
    std::optional<std::uint32_t> full_round;
    std::optional<std::uint8_t> opinion;  // the agreed value, when any
    std::uint32_t rounds_run{0};
};

class VoterNetwork {
public:
    explicit VoterNetwork(ConsensusConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        opinions_ = cfg_.initial;
        if (cfg_.edges.empty()) {
            for (std::uint32_t a = 0; a < cfg_.n; ++a)
                for (std::uint32_t b = a + 1; b < cfg_.n; ++b) edges_.push_back({a, b});
        } else {
            edges_ = cfg_.edges;
        }
        stamp_.assign(static_cast<std::size_t>(cfg_.n) * cfg_.n, -1);
        known_.assign(static_cast<std::size_t>(cfg_.n) * cfg_.n, 0);
        for (std::uint32_t i = 0; i < cfg_.n; ++i) {
            stamp(i, i) = 0;
            known(i, i) = opinions_[i];
        }
    }

    const ConsensusConfig& config() const { return cfg_; }
    const std::vector<std::uint8_t>& opinions() const { return opinions_; }
    std::uint32_t round() const { return round_; }

    bool unanimous() const {
        for (std::uint8_t o : opinions_)
            if (o != opinions_[0]) return false;
        return true;
    }

    // Node i knows a post-`since` opinion of every node.
    bool informed(std::uint32_t i, std::int64_t since) const {
        for (std::uint32_t j = 0; j < cfg_.n; ++j)
            if (stamp(i, j) < since) return false;
        return true;
    }

    // One synchronous round. Returns the drawn contact set. Contact
    // selection is a random maximal legal set: edges are shuffled and added
    // greedily while both endpoints have budget left.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> step_round(RngStream& rng) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> contacts;
        if (cfg_.contact_budget > 0 && !edges_.empty()) {
            shuffle_order_.resize(edges_.size());
            for (std::size_t k = 0; k < edges_.size(); ++k) shuffle_order_[k] = k;
            for (std::size_t k = edges_.size(); k > 1; --k)
                std::swap(shuffle_order_[k - 1], shuffle_order_[rng.next_below(k)]);
            degree_.assign(cfg_.n, 0);
            for (std::size_t k : shuffle_order_) {
                auto [a, b] = edges_[k];
                if (degree_[a] < cfg_.contact_budget && degree_[b] < cfg_.contact_budget) {
                    ++degree_[a];
                    ++degree_[b];
                    contacts.push_back({a, b});
                }
            }
        }

        // Gossip merge on a snapshot of the pre-round records.
        std::vector<std::int64_t> old_stamp = stamp_;
        std::vector<std::uint8_t> old_known = known_;
        auto merge_from = [&](std::uint32_t into, std::uint32_t from) {
            for (std::uint32_t j = 0; j < cfg_.n; ++j) {
                std::int64_t s = old_stamp[idx(from, j)];
                if (s > stamp(into, j)) {
                    stamp(into, j) = s;
                    known(into, j) = old_known[idx(from, j)];
                }
            }
        };
        for (auto [a, b] : contacts) {
            merge_from(a, b);
            merge_from(b, a);
        }

        // Synchronous opinion update on the pre-round opinions.
        std::vector<std::uint8_t> next = opinions_;
        std::vector<std::uint32_t> ones(cfg_.n, 0), total(cfg_.n, 0);
        for (std::uint32_t i = 0; i < cfg_.n; ++i) {
            ones[i] = opinions_[i];
            total[i] = 1;
        }
        for (auto [a, b] : contacts) {
            ones[a] += opinions_[b];
            ++total[a];
            ones[b] += opinions_[a];
            ++total[b];
        }
        for (std::uint32_t i = 0; i < cfg_.n; ++i) {
            if (!cfg_.stubborn.empty() && cfg_.stubborn[i]) continue;
            if (2 * ones[i] > total[i])
                next[i] = 1;
            else if (2 * ones[i] < total[i])
                next[i] = 0;
            // exact tie keeps the current opinion
        }
        opinions_ = std::move(next);
        ++round_;
        for (std::uint32_t i = 0; i < cfg_.n; ++i) {
            stamp(i, i) = round_;
            known(i, i) = opinions_[i];
        }
        return contacts;
    }

private:
    std::size_t idx(std::uint32_t i, std::uint32_t j) const {
        return static_cast<std::size_t>(i) * cfg_.n + j;
    }
    std::int64_t& stamp(std::uint32_t i, std::uint32_t j) { return stamp_[idx(i, j)]; }
    std::int64_t stamp(std::uint32_t i, std::uint32_t j) const { return stamp_[idx(i, j)]; }
    std::uint8_t& known(std::uint32_t i, std::uint32_t j) { return known_[idx(i, j)]; }

    ConsensusConfig cfg_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
    std::vector<std::uint8_t> opinions_;
    std::vector<std::int64_t> stamp_;  // stamp(i,j): round whose opinion of j node i knows
    std::vector<std::uint8_t> known_;
    std::uint32_t round_{0};
    std::vector<std::size_t> shuffle_order_;
    std::vector<std::uint32_t> degree_;
};

inline ConsensusVerdict run_consensus(const ConsensusConfig& cfg, std::uint64_t seed,
                                      std::uint64_t stream_id = 0) {
    VoterNetwork net(cfg);
    RngStream rng(seed, stream_id_from_label("consensus") ^ stream_id);
    ConsensusVerdict v;

    auto check = [&] {
        if (!v.birdseye_round && net.unanimous()) {
            v.birdseye_round = net.round();
            v.opinion = net.opinions()[0];
        }
        if (v.birdseye_round) {
            std::int64_t since = static_cast<std::int64_t>(*v.birdseye_round);
            if (!v.initiator_round && net.informed(cfg.initiator, since))
                v.initiator_round = net.round();
            if (!v.full_round) {
                bool all = true;
                for (std::uint32_t i = 0; i < cfg.n && all; ++i)
                    all = net.informed(i, since);
                if (all) v.full_round = net.round();
            }
        }
    };

    check();
    while (net.round() < cfg.max_rounds &&
           !(v.birdseye_round && v.initiator_round && v.full_round)) {
        net.step_round(rng);
        check();
    }
    v.rounds_run = net.round();
    return v;
}

}  // namespace tempo
