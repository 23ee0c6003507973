#pragma once

#include <string>
#include <vector>

namespace tempo {

// Ready-made scenario texts, mirrored one to one by the files under
// scenarios/. The CLI resolves names against this table so a built binary
// works without the repository checkout.
struct BuiltinScenario {
    const char* name;
    const char* text;
};

namespace detail {

const BuiltinScenario k_anchor_decision_aoi{
    "anchor_decision_aoi",
    R"json({
  "name": "anchor_decision_aoi",
  "description": "Periodic status updates for a decision consumer that cares how stale its newest sample is. Freshest-first queueing over a lossy block channel; reports mean age, age peaks and the age seen at random query instants.",
  "seed": 7,
  "horizon_s": 60.0,
  "channels": {
    "uplink": { "kind": "shannon", "bandwidth_hz": 100000.0, "block_error_prob": 0.1, "bits_per_channel_use": 1.0 }
  },
  "experiment": {
    "kind": "one_way",
    "source": { "kind": "periodic", "period_ms": 100.0, "size_bits": 2000 },
    "queue": { "kind": "purge_replace" },
    "channel": "uplink",
    "retransmit": true
  },
  "metrics": [
    { "kind": "aoi" },
    { "kind": "paoi" },
    { "kind": "qaoi", "query": { "kind": "poisson", "rate_per_s": 3.0 } }
  ]
}
)json"};

const BuiltinScenario k_anchor_estimation_wiener{
    "anchor_estimation_wiener",
    R"json({
  "name": "anchor_estimation_wiener",
  "description": "Remote estimation of a drifting process from randomly timed samples. The receiver holds the last delivered value; the report relates squared estimation error to the age of that value.",
  "seed": 21,
  "horizon_s": 100.0,
  "experiment": {
    "kind": "estimation",
    "source": { "kind": "poisson", "rate_per_s": 20.0, "size_bits": 512 },
    "process": { "kind": "wiener", "sigma_per_sqrt_s": 1.0, "dim": 1 },
    "channel": { "kind": "sampled", "delay": { "kind": "exponential", "rate_per_s": 200.0 }, "success_prob": 0.95 },
    "retransmit": true,
    "tick_ms": 5.0,
    "age_bin_ms": 10.0,
    "age_bins": 100
  }
}
)json"};

const BuiltinScenario k_aoii_markov{
    "aoii_markov",
    R"json({
  "name": "aoii_markov",
  "description": "Tracking a two-state source that flips a few times a second. Age of incorrect information stays at zero while the held estimate matches, so it can be far below plain age.",
  "seed": 19,
  "horizon_s": 100.0,
  "experiment": {
    "kind": "one_way",
    "source": { "kind": "periodic", "period_ms": 20.0, "size_bits": 128 },
    "queue": { "kind": "purge_replace" },
    "channel": { "kind": "sampled", "delay": { "kind": "deterministic", "value_s": 0.004 }, "success_prob": 0.9 },
    "retransmit": false,
    "process": { "kind": "two_state_markov", "flip_rate_per_s": 5.0 }
  },
  "metrics": [
    { "kind": "aoi" },
    { "kind": "aoii" }
  ]
}
)json"};

const BuiltinScenario k_control_loop{
    "control_loop",
    R"json({
  "name": "control_loop",
  "description": "Sensor state up, command back down, with controller compute in between. Loop closure time is the round-trip timing budget; cycles cut off by the horizon stay open.",
  "seed": 9,
  "horizon_s": 120.0,
  "channels": {
    "uplink": { "kind": "shannon", "bandwidth_hz": 100000.0, "block_error_prob": 0.05, "bits_per_channel_use": 1.0 },
    "downlink": { "kind": "shannon", "bandwidth_hz": 200000.0, "block_error_prob": 0.05, "bits_per_channel_use": 1.0 }
  },
  "experiment": {
    "kind": "loop",
    "source": { "kind": "periodic", "period_ms": 50.0, "size_bits": 1024 },
    "uplink": "uplink",
    "downlink": "downlink",
    "uplink_retransmit": true,
    "downlink_retransmit": true,
    "controller_compute_ms": 5.0
  }
}
)json"};

const BuiltinScenario k_deadline_decision_urllc{
    "deadline_decision_urllc",
    R"json({
  "name": "deadline_decision_urllc",
  "description": "Hard 10 ms delivery deadline on periodic commands over a jittery link. Reports the violation probability, timely throughput and the fraction landing inside the on-time window.",
  "seed": 3,
  "horizon_s": 100.0,
  "experiment": {
    "kind": "one_way",
    "source": { "kind": "periodic", "period_ms": 10.0, "size_bits": 256 },
    "queue": { "kind": "fcfs", "capacity": 4, "on_full": "drop_newest" },
    "channel": { "kind": "sampled", "delay": { "kind": "uniform", "low_s": 0.002, "high_s": 0.015 }, "success_prob": 0.99 },
    "retransmit": false
  },
  "metrics": [
    { "kind": "latency" },
    { "kind": "deadline", "deadline_ms": 10.0, "earliness_window_ms": 10.0 }
  ]
}
)json"};

const BuiltinScenario k_deadline_estimation_fl{
    "deadline_estimation_fl",
    R"json({
  "name": "deadline_estimation_fl",
  "description": "Federated training under a round budget: how many synchronous rounds are enough to hit the target gradient norm with 90 percent confidence.",
  "seed": 11,
  "horizon_s": 1.0,
  "experiment": {
    "kind": "fedsim",
    "mode": "reliability",
    "devices": {
      "count": 8,
      "compute": { "kind": "exponential", "rate_per_s": 20.0 },
      "upload": { "kind": "uniform", "low_s": 0.05, "high_s": 0.15 }
    },
    "policy": { "kind": "none" },
    "task": {
      "dim": 2,
      "w_opt": [0.0, 0.0],
      "w0": [2.0, -1.0],
      "noise_scale": 0.2,
      "batch": 1.0,
      "step_mu": 0.25,
      "threshold_delta": 0.1
    },
    "round_grid": [5, 10, 20, 40, 80],
    "trials": 200,
    "target_prob": 0.9
  }
}
)json"};

const BuiltinScenario k_event_triggered{
    "event_triggered",
    R"json({
  "name": "event_triggered",
  "description": "Samples fire only when the watched process drifts a threshold away from its last anchor, so update timing is information driven rather than clock driven.",
  "seed": 23,
  "horizon_s": 200.0,
  "experiment": {
    "kind": "one_way",
    "source": { "kind": "event_threshold", "threshold": 0.5, "tick_ms": 2.0, "size_bits": 512 },
    "queue": { "kind": "fcfs", "capacity": 2, "on_full": "drop_oldest" },
    "channel": { "kind": "sampled", "delay": { "kind": "exponential", "rate_per_s": 150.0 }, "success_prob": 0.97 },
    "retransmit": true,
    "process": { "kind": "wiener", "sigma_per_sqrt_s": 1.0, "dim": 1 }
  },
  "metrics": [
    { "kind": "latency" },
    { "kind": "aoi" },
    { "kind": "paoi" }
  ]
}
)json"};

const BuiltinScenario k_fig1_intermittent{
    "fig1_intermittent",
    R"json({
  "name": "fig1_intermittent",
  "description": "A high-rate user shares slots with an intermittent one. Reserving every fourth slot caps update latency but burns capacity; granting slots only on demand keeps goodput high and answers queries with fresh samples.",
  "seed": 2,
  "horizon_s": 20.0,
  "experiment": {
    "kind": "fig1",
    "scheme": "both",
    "reservation_period_slots": 4,
    "horizon_slots": 20000,
    "slot_ms": 1.0,
    "updates": { "kind": "bernoulli", "prob": 0.3 },
    "query": { "kind": "periodic", "period_slots": 8 }
  }
}
)json"};

const BuiltinScenario k_mm1_baseline{
    "mm1_baseline",
    R"json({
  "name": "mm1_baseline",
  "description": "Poisson arrivals into an exponential server at load 0.5; the textbook latency and age baseline.",
  "seed": 1,
  "horizon_s": 200.0,
  "experiment": {
    "kind": "one_way",
    "source": { "kind": "poisson", "rate_per_s": 50.0, "size_bits": 1000 },
    "queue": { "kind": "fcfs", "capacity": 0, "on_full": "drop_newest" },
    "channel": { "kind": "sampled", "delay": { "kind": "exponential", "rate_per_s": 100.0 }, "success_prob": 1.0 },
    "retransmit": true
  },
  "metrics": [
    { "kind": "latency" },
    { "kind": "aoi" },
    { "kind": "paoi" }
  ]
}
)json"};

const BuiltinScenario k_pipeline_coupled{
    "pipeline_coupled",
    R"json({
  "name": "pipeline_coupled",
  "description": "Sense, encode, transmit as a cascade. Encoding scales with payload size; occasionally the sensing stage triggers a metadata side effect that stretches transmission.",
  "seed": 29,
  "horizon_s": 1.0,
  "experiment": {
    "kind": "pipeline",
    "variant": "coupled",
    "stages": [
      { "name": "sense", "latency": { "kind": "uniform", "low_s": 0.001, "high_s": 0.002 }, "latency_units": "s" },
      { "name": "encode", "latency": { "kind": "uniform", "low_s": 0.5, "high_s": 1.5 }, "latency_units": "s_per_mbit", "output_ratio": 0.5 },
      { "name": "transmit", "latency": { "kind": "exponential", "rate_per_s": 100.0 }, "latency_units": "s" }
    ],
    "coupling": {
      "trigger_stage": 0,
      "target_stage": 2,
      "fire_prob": 0.3,
      "metadata_latency_ms": 1.0,
      "latency_factor": 1.5
    },
    "input_size_bits": 100000,
    "runs": 20000
  }
}
)json"};

const BuiltinScenario k_relative_decision_consensus{
    "relative_decision_consensus",
    R"json({
  "name": "relative_decision_consensus",
  "description": "Budgeted gossip voting on a complete graph of eight nodes. Separates when agreement happens from when the initiator, and then everyone, can know it happened.",
  "seed": 5,
  "horizon_s": 1.0,
  "experiment": {
    "kind": "consensus",
    "nodes": 8,
    "contact_budget": 2,
    "graph": "complete",
    "initial_opinions": { "ones": 5 },
    "initiator": 0,
    "max_rounds": 200,
    "runs": 400
  }
}
)json"};

const BuiltinScenario k_relative_estimation_fl{
    "relative_estimation_fl",
    R"json({
  "name": "relative_estimation_fl",
  "description": "Federated training where two stragglers join only every third round and push gradients evaluated on a stale model. What matters is their lag relative to the aggregation cadence, not wall-clock time.",
  "seed": 13,
  "horizon_s": 1.0,
  "experiment": {
    "kind": "fedsim",
    "mode": "train",
    "devices": {
      "count": 6,
      "compute": { "kind": "exponential", "rate_per_s": 25.0 },
      "upload": { "kind": "uniform", "low_s": 0.02, "high_s": 0.08 }
    },
    "policy": { "kind": "reduced_frequency", "straggler_ids": [4, 5], "every_m": 3 },
    "task": {
      "dim": 2,
      "w_opt": [1.0, -1.0],
      "w0": [4.0, 2.0],
      "device_offsets": [
        [0.1, 0.0], [-0.1, 0.0], [0.0, 0.1], [0.0, -0.1], [0.2, 0.2], [-0.2, -0.2]
      ],
      "noise_scale": 0.05,
      "batch": 1.0,
      "step_mu": 0.4,
      "threshold_delta": 0.05
    },
    "rounds": 40
  }
}
)json"};

const BuiltinScenario k_twoway_pull{
    "twoway_pull",
    R"json({
  "name": "twoway_pull",
  "description": "Same exchange as twoway_split but initiated by the consumer: each transfer prepends a request leg, and a lost request costs the request time plus a full round trip.",
  "seed": 17,
  "horizon_s": 1.0,
  "experiment": {
    "kind": "two_way",
    "mode": "pull",
    "channel": { "kind": "shannon", "bandwidth_hz": 1000000.0, "block_error_prob": 0.1, "bits_per_channel_use": 1.0 },
    "data_bits": 800,
    "ack_bits": 100,
    "request_bits": 64,
    "split_k": 0.6,
    "round_channel_uses": 1000,
    "transfers": 20000
  }
}
)json"};

const BuiltinScenario k_twoway_split{
    "twoway_split",
    R"json({
  "name": "twoway_split",
  "description": "Data plus acknowledgement sharing a fixed round trip, 60/40 split of the channel uses. Transfer time is geometric in the round count.",
  "seed": 17,
  "horizon_s": 1.0,
  "experiment": {
    "kind": "two_way",
    "mode": "push",
    "channel": { "kind": "shannon", "bandwidth_hz": 1000000.0, "block_error_prob": 0.1, "bits_per_channel_use": 1.0 },
    "data_bits": 800,
    "ack_bits": 100,
    "split_k": 0.6,
    "round_channel_uses": 1000,
    "transfers": 20000
  }
}
)json"};

}  // namespace detail

inline const std::vector<BuiltinScenario>& builtin_scenarios() {
    static const std::vector<BuiltinScenario> all = {
        detail::k_anchor_decision_aoi,
        detail::k_anchor_estimation_wiener,
        detail::k_aoii_markov,
        detail::k_control_loop,
        detail::k_deadline_decision_urllc,
        detail::k_deadline_estimation_fl,
        detail::k_event_triggered,
        detail::k_fig1_intermittent,
        detail::k_mm1_baseline,
        detail::k_pipeline_coupled,
        detail::k_relative_decision_consensus,
        detail::k_relative_estimation_fl,
        detail::k_twoway_pull,
        detail::k_twoway_split,
    };
    return all;
}

inline const char* find_builtin(const std::string& name) {
    for (const BuiltinScenario& b : builtin_scenarios())
        if (name == b.name) return b.text;
    return nullptr;
}

}  // namespace tempo
