#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

// Slotted uplink shared by a backlogged high-rate user and an intermittent
// update source. Two ways to serve the intermittent user:
//   reservation: every R-th slot is reserved whether or not an update is
//     pending, bounding update latency by R slots at the price of goodput;
//   pull: the base station grants a slot only when it queries, so unused
//     slots go to the high-rate user and the update is sampled on demand.
// Updates and queries land on slot boundaries; a slot granted at instant s
// delivers by s + 1. The intermittent user keeps only the freshest pending
// update (a fresher arrival supplants a waiting one).
struct Fig1Config {
    enum class Arrivals { never, always, periodic, bernoulli };

    std::uint64_t reservation_period_slots{4};
    std::uint64_t horizon_slots{10000};
    Span slot{Span::from_millis(1.0)};

    Arrivals updates{Arrivals::always};
    std::uint64_t update_period_slots{1};
    double update_prob{0.5};

    Arrivals query{Arrivals::periodic};
    std::uint64_t query_period_slots{8};
    double query_prob{0.125};

    void validate() const {
        if (reservation_period_slots == 0)
            throw ValidationError("reservation period must be >= 1 slot");
        if (horizon_slots == 0) throw ValidationError("horizon must be >= 1 slot");
        if (slot.ns <= 0) throw ValidationError("slot length must be > 0");
        if (updates == Arrivals::periodic && update_period_slots == 0)
            throw ValidationError("update period must be >= 1 slot");
        if (query == Arrivals::periodic && query_period_slots == 0)
            throw ValidationError("query period must be >= 1 slot");
        for (double p : {update_prob, query_prob})
            if (p < 0.0 || p > 1.0) throw ValidationError("probability out of [0, 1]");
    }
};

struct Fig1ModeResult {
    std::string scheme;
    double highrate_goodput{0.0};      // fraction of slots carrying bulk data
    std::uint64_t updates_delivered{0};
    std::uint64_t updates_supplanted{0};
    double worst_latency_slots{0.0};   // delivery end minus arrival
    double mean_latency_slots{0.0};
    double qaoi_mean_slots{0.0};       // age sampled at query instants
    std::uint64_t qaoi_samples{0};
};

namespace detail {

inline bool fig1_fires(Fig1Config::Arrivals kind, std::uint64_t slot, std::uint64_t period,
                       double prob, RngStream& rng) {
    switch (kind) {
        case Fig1Config::Arrivals::never: return false;
        case Fig1Config::Arrivals::always: return true;
        case Fig1Config::Arrivals::periodic: return slot % period == 0;
        case Fig1Config::Arrivals::bernoulli: return rng.bernoulli(prob);
    }
    return false;
}

}  // namespace detail

inline Fig1ModeResult run_fig1_reservation(const Fig1Config& cfg, std::uint64_t seed) {
    cfg.validate();
    RngStream arr_rng(seed, "fig1/updates");
    RngStream qry_rng(seed, "fig1/queries");

    Fig1ModeResult out;
    out.scheme = "reservation";
    std::optional<std::uint64_t> pending;        // arrival slot of the waiting update
    std::optional<std::uint64_t> last_anchor;    // arrival slot of the newest delivery
    std::uint64_t highrate_slots = 0;
    double lat_sum = 0.0, lat_max = 0.0;
    double age_sum = 0.0;

    for (std::uint64_t s = 0; s < cfg.horizon_slots; ++s) {
        if (detail::fig1_fires(cfg.updates, s, cfg.update_period_slots, cfg.update_prob,
                               arr_rng)) {
            if (pending) ++out.updates_supplanted;
            pending = s;
        }
        if (detail::fig1_fires(cfg.query, s, cfg.query_period_slots, cfg.query_prob,
                               qry_rng) &&
            last_anchor) {
            age_sum += static_cast<double>(s - *last_anchor);
            ++out.qaoi_samples;
        }
        if (s % cfg.reservation_period_slots == 0) {
            if (pending) {
                double lat = static_cast<double>(s + 1 - *pending);
                lat_sum += lat;
                lat_max = std::max(lat_max, lat);
                ++out.updates_delivered;
                last_anchor = *pending;
                pending.reset();
            }
            // reserved slot stays unavailable to the bulk user either way
        } else {
            ++highrate_slots;
        }
    }
    out.highrate_goodput =
        static_cast<double>(highrate_slots) / static_cast<double>(cfg.horizon_slots);
    if (out.updates_delivered) {
        out.mean_latency_slots = lat_sum / static_cast<double>(out.updates_delivered);
        out.worst_latency_slots = lat_max;
    }
    if (out.qaoi_samples)
        out.qaoi_mean_slots = age_sum / static_cast<double>(out.qaoi_samples);
    return out;
}

inline Fig1ModeResult run_fig1_pull(const Fig1Config& cfg, std::uint64_t seed) {
    cfg.validate();
    RngStream qry_rng(seed, "fig1/queries");

    Fig1ModeResult out;
    out.scheme = "pull";
    std::optional<std::uint64_t> last_anchor;
    std::uint64_t highrate_slots = 0;
    double age_sum = 0.0;

    for (std::uint64_t s = 0; s < cfg.horizon_slots; ++s) {
        bool queried = detail::fig1_fires(cfg.query, s, cfg.query_period_slots,
                                          cfg.query_prob, qry_rng);
        if (queried) {
            if (last_anchor) {
                age_sum += static_cast<double>(s - *last_anchor);
                ++out.qaoi_samples;
            }
            // Fresh sample taken and sent in the granted slot.
            ++out.updates_delivered;
            last_anchor = s;
        } else {
            ++highrate_slots;
        }
    }
    out.highrate_goodput =
        static_cast<double>(highrate_slots) / static_cast<double>(cfg.horizon_slots);
    if (out.updates_delivered) {
        out.mean_latency_slots = 1.0;  // sampled at the grant, delivered a slot later
        out.worst_latency_slots = 1.0;
    }
    if (out.qaoi_samples)
        out.qaoi_mean_slots = age_sum / static_cast<double>(out.qaoi_samples);
    return out;
}

}  // namespace tempo
