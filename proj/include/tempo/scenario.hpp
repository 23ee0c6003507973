#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tempo/channel.hpp"
#include "tempo/consensus.hpp"
#include "tempo/dist.hpp"
#include "tempo/errors.hpp"
#include "tempo/fedsim.hpp"
#include "tempo/fig1.hpp"
#include "tempo/pipeline.hpp"
#include "tempo/process.hpp"
#include "tempo/protocols.hpp"
#include "tempo/queue.hpp"
#include "tempo/source.hpp"

namespace tempo {

using njson = nlohmann::ordered_json;

// ---- typed scenario model -------------------------------------------------

struct MetricRequest {
    enum class Kind { latency, aoi, paoi, qaoi, aoii, deadline };
    Kind kind{Kind::latency};
    SourceSpec query;  // qaoi sampling process
    Span deadline{Span::zero()};
    Span earliness{Span::zero()};
};

struct EstimationConfig {
    SourceSpec source;
    ProcessModel process{ProcessModel::wiener(1.0)};
    Channel channel{SampledChannel{DistSpec::deterministic(0.0), 1.0}};
    bool retransmit{true};
    Span tick{Span::from_millis(10.0)};
    Span age_bin{Span::from_millis(10.0)};
    std::size_t age_bins{200};
};

struct PipelineScenario {
    enum class Variant { independent, coupled, merged };
    Variant variant{Variant::independent};
    std::vector<StageSpec> stages;
    CouplingSpec coupling;
    bool has_coupling{false};
    std::size_t merge_at{0};
    StageSpec merged;
    bool has_merged{false};
    std::uint64_t input_bits{1000000};
    std::uint64_t runs{10000};
};

struct ConsensusScenario {
    ConsensusConfig cfg;
    std::uint64_t runs{1000};
};

struct FedScenario {
    enum class Mode { train, reliability, rate_check };
    Mode mode{Mode::train};
    std::vector<DeviceProfile> devices;
    StragglerPolicy policy;
    QuadraticTask task;
    std::uint64_t rounds{10};
    std::vector<std::uint64_t> round_grid;
    std::uint64_t trials{100};
    std::optional<double> target_prob;
    double c3{1.0};
};

struct Scenario {
    enum class Kind { one_way, two_way, loop, estimation, pipeline, consensus, fedsim, fig1 };

    std::string name{"unnamed"};
    std::string description;
    std::uint64_t seed{1};
    Span horizon{Span::from_seconds(10.0)};
    Kind kind{Kind::one_way};

    OneWayConfig one_way;
    TwoWayConfig two_way;
    std::uint64_t two_way_transfers{10000};
    LoopConfig loop;
    EstimationConfig estimation;
    PipelineScenario pipeline;
    ConsensusScenario consensus;
    FedScenario fed;
    Fig1Config fig1;
    std::string fig1_scheme{"both"};

    std::vector<MetricRequest> metrics;
};

// ---- parse helpers ----------------------------------------------------------

namespace cfg {

[[noreturn]] inline void fail(const std::string& path, const std::string& why) {
    throw ValidationError(path + ": " + why);
}

inline const njson& need(const njson& o, const char* key, const std::string& path) {
    if (!o.is_object()) fail(path, "expected an object");
    auto it = o.find(key);
    if (it == o.end()) fail(path + "." + key, "missing required field");
    return *it;
}

inline double num(const njson& o, const char* key, const std::string& path) {
    const njson& v = need(o, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

inline double num_or(const njson& o, const char* key, const std::string& path, double def) {
    if (!o.is_object() || !o.contains(key)) return def;
    return num(o, key, path);
}

inline std::uint64_t uint_or(const njson& o, const char* key, const std::string& path,
                             std::uint64_t def) {
    if (!o.is_object() || !o.contains(key)) return def;
    const njson& v = o.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        fail(path + "." + key, "expected an integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        fail(path + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::uint64_t req_uint(const njson& o, const char* key, const std::string& path) {
    need(o, key, path);
    return uint_or(o, key, path, 0);
}

inline bool flag_or(const njson& o, const char* key, const std::string& path, bool def) {
    if (!o.is_object() || !o.contains(key)) return def;
    const njson& v = o.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "expected true or false");
    return v.get<bool>();
}

inline std::string str(const njson& o, const char* key, const std::string& path) {
    const njson& v = need(o, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline std::string str_or(const njson& o, const char* key, const std::string& path,
                          const std::string& def) {
    if (!o.is_object() || !o.contains(key)) return def;
    return str(o, key, path);
}

// ---- distribution ----

inline DistSpec parse_dist(const njson& o, const std::string& path) {
    std::string kind = str(o, "kind", path);
    try {
        if (kind == "deterministic") return DistSpec::deterministic(num(o, "value_s", path));
        if (kind == "exponential") return DistSpec::exponential(num(o, "rate_per_s", path));
        if (kind == "uniform")
            return DistSpec::uniform(num(o, "low_s", path), num(o, "high_s", path));
        if (kind == "geometric_trials")
            return DistSpec::geometric_trials(num(o, "success_prob", path));
        if (kind == "empirical") {
            const njson& arr = need(o, "samples_s", path);
            if (!arr.is_array()) fail(path + ".samples_s", "expected an array");
            std::vector<double> v;
            for (const auto& x : arr) v.push_back(x.get<double>());
            return DistSpec::empirical(std::move(v));
        }
    } catch (const InvalidDistribution& e) {
        fail(path, e.what());
    } catch (const EmptySample& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown distribution kind '" + kind + "'");
}

inline njson dist_json(const DistSpec& d) {
    njson o;
    switch (d.kind) {
        case DistKind::deterministic:
            o["kind"] = "deterministic";
            o["value_s"] = d.a;
            break;
        case DistKind::exponential:
            o["kind"] = "exponential";
            o["rate_per_s"] = d.a;
            break;
        case DistKind::uniform:
            o["kind"] = "uniform";
            o["low_s"] = d.a;
            o["high_s"] = d.b;
            break;
        case DistKind::geometric_trials:
            o["kind"] = "geometric_trials";
            o["success_prob"] = d.a;
            break;
        case DistKind::empirical:
            o["kind"] = "empirical";
            o["samples_s"] = d.samples;
            break;
    }
    return o;
}

// ---- channel ----

inline Channel parse_channel(const njson& o, const std::string& path) {
    std::string kind = str(o, "kind", path);
    try {
        if (kind == "shannon") {
            ShannonChannel c;
            c.bandwidth_hz = num(o, "bandwidth_hz", path);
            c.block_error_prob = num_or(o, "block_error_prob", path, 0.0);
            c.bits_per_channel_use = num_or(o, "bits_per_channel_use", path, 1.0);
            c.validate();
            return c;
        }
        if (kind == "sampled") {
            SampledChannel c;
            c.delay = parse_dist(need(o, "delay", path), path + ".delay");
            c.success_prob = num_or(o, "success_prob", path, 1.0);
            c.validate();
            return c;
        }
    } catch (const InvalidDistribution& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown channel kind '" + kind + "'");
}

inline njson channel_json(const Channel& ch) {
    njson o;
    if (const auto* sh = std::get_if<ShannonChannel>(&ch)) {
        o["kind"] = "shannon";
        o["bandwidth_hz"] = sh->bandwidth_hz;
        o["block_error_prob"] = sh->block_error_prob;
        o["bits_per_channel_use"] = sh->bits_per_channel_use;
    } else {
        const auto& sc = std::get<SampledChannel>(ch);
        o["kind"] = "sampled";
        o["delay"] = dist_json(sc.delay);
        o["success_prob"] = sc.success_prob;
    }
    return o;
}

// ---- process ----

inline ProcessModel parse_process(const njson& o, const std::string& path) {
    std::string kind = str(o, "kind", path);
    try {
        if (kind == "wiener")
            return ProcessModel::wiener(
                num(o, "sigma_per_sqrt_s", path),
                static_cast<std::size_t>(uint_or(o, "dim", path, 1)));
        if (kind == "two_state_markov")
            return ProcessModel::two_state_markov(num(o, "flip_rate_per_s", path));
        if (kind == "constant") return ProcessModel::constant(num(o, "value", path));
    } catch (const InvalidDistribution& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown process kind '" + kind + "'");
}

inline njson process_json(const ProcessModel& p) {
    njson o;
    switch (p.kind) {
        case ProcessKind::wiener:
            o["kind"] = "wiener";
            o["sigma_per_sqrt_s"] = p.sigma;
            o["dim"] = p.state.size();
            break;
        case ProcessKind::two_state_markov:
            o["kind"] = "two_state_markov";
            o["flip_rate_per_s"] = p.flip_rate;
            break;
        case ProcessKind::constant:
            o["kind"] = "constant";
            o["value"] = p.state.empty() ? 0.0 : p.state[0];
            break;
    }
    return o;
}

// ---- source ----

inline SourceSpec parse_source(const njson& o, const std::string& path) {
    std::string kind = str(o, "kind", path);
    SourceSpec s;
    try {
        if (kind == "periodic") {
            s.kind = SourceKind::periodic;
            s.period = Span::from_millis(num(o, "period_ms", path));
        } else if (kind == "poisson") {
            s.kind = SourceKind::poisson;
            s.rate_per_s = num(o, "rate_per_s", path);
        } else if (kind == "event_threshold") {
            s.kind = SourceKind::event_threshold;
            s.threshold = num(o, "threshold", path);
            s.tick = Span::from_millis(num_or(o, "tick_ms", path, 1.0));
        } else {
            fail(path + ".kind", "unknown source kind '" + kind + "'");
        }
        s.size_bits = uint_or(o, "size_bits", path, 1000);
        s.validate();
    } catch (const InvalidDistribution& e) {
        fail(path, e.what());
    }
    return s;
}

inline njson source_json(const SourceSpec& s) {
    njson o;
    switch (s.kind) {
        case SourceKind::periodic:
            o["kind"] = "periodic";
            o["period_ms"] = s.period.millis();
            break;
        case SourceKind::poisson:
            o["kind"] = "poisson";
            o["rate_per_s"] = s.rate_per_s;
            break;
        case SourceKind::event_threshold:
            o["kind"] = "event_threshold";
            o["threshold"] = s.threshold;
            o["tick_ms"] = s.tick.millis();
            break;
    }
    o["size_bits"] = s.size_bits;
    return o;
}

// ---- queue ----

inline QueueSpec parse_queue(const njson& o, const std::string& path) {
    std::string kind = str(o, "kind", path);
    if (kind == "fcfs") {
        std::string on_full = str_or(o, "on_full", path, "drop_newest");
        DropPolicy dp;
        if (on_full == "drop_newest")
            dp = DropPolicy::drop_newest;
        else if (on_full == "drop_oldest")
            dp = DropPolicy::drop_oldest;
        else
            fail(path + ".on_full", "expected drop_newest or drop_oldest");
        return QueueSpec::fcfs(uint_or(o, "capacity", path, 0), dp);
    }
    if (kind == "lcfs_preempt") return QueueSpec::lcfs_preempt();
    if (kind == "purge_replace") return QueueSpec::purge_replace();
    if (kind == "queue_and_reorder") return QueueSpec::queue_and_reorder();
    fail(path + ".kind", "unknown queue kind '" + kind + "'");
}

inline njson queue_json(const QueueSpec& q) {
    njson o;
    switch (q.kind) {
        case QueueKind::fcfs:
            o["kind"] = "fcfs";
            o["capacity"] = q.capacity;
            o["on_full"] =
                q.on_full == DropPolicy::drop_newest ? "drop_newest" : "drop_oldest";
            break;
        case QueueKind::lcfs_preempt: o["kind"] = "lcfs_preempt"; break;
        case QueueKind::purge_replace: o["kind"] = "purge_replace"; break;
        case QueueKind::queue_and_reorder: o["kind"] = "queue_and_reorder"; break;
    }
    return o;
}

// ---- named channel table ----

class ChannelTable {
public:
    ChannelTable(const njson& root, const std::string& path) {
        if (!root.is_object() || !root.contains("channels")) return;
        const njson& t = root.at("channels");
        if (!t.is_object()) fail(path + ".channels", "expected an object");
        for (auto it = t.begin(); it != t.end(); ++it) {
            names_.push_back(it.key());
            channels_.push_back(parse_channel(it.value(), path + ".channels." + it.key()));
        }
    }

    Channel resolve(const njson& o, const char* key, const std::string& path) const {
        const njson& v = need(o, key, path);
        if (v.is_object()) return parse_channel(v, path + "." + key);
        if (!v.is_string()) fail(path + "." + key, "expected a channel name or object");
        std::string name = v.get<std::string>();
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) {
                used_.push_back(name);
                return channels_[i];
            }
        fail(path + "." + key, "dangling channel reference '" + name + "'");
    }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Channel>& channels() const { return channels_; }

private:
    std::vector<std::string> names_;
    std::vector<Channel> channels_;
    mutable std::vector<std::string> used_;
};

}  // namespace cfg

// ---- scenario load/echo -----------------------------------------------------

namespace cfg {

inline MetricRequest parse_metric(const njson& o, const std::string& path) {
    MetricRequest m;
    std::string kind = str(o, "kind", path);
    if (kind == "latency")
        m.kind = MetricRequest::Kind::latency;
    else if (kind == "aoi")
        m.kind = MetricRequest::Kind::aoi;
    else if (kind == "paoi")
        m.kind = MetricRequest::Kind::paoi;
    else if (kind == "qaoi") {
        m.kind = MetricRequest::Kind::qaoi;
        m.query = parse_source(need(o, "query", path), path + ".query");
        if (m.query.kind == SourceKind::event_threshold)
            fail(path + ".query.kind", "queries must be periodic or poisson");
    } else if (kind == "aoii")
        m.kind = MetricRequest::Kind::aoii;
    else if (kind == "deadline") {
        m.kind = MetricRequest::Kind::deadline;
        m.deadline = Span::from_millis(num(o, "deadline_ms", path));
        m.earliness = Span::from_millis(num_or(o, "earliness_window_ms", path,
                                               num(o, "deadline_ms", path)));
        if (m.deadline.ns < 0 || m.earliness.ns < 0)
            fail(path, "deadline and earliness window must be >= 0");
    } else {
        fail(path + ".kind", "unknown metric kind '" + kind + "'");
    }
    return m;
}

inline njson metric_json(const MetricRequest& m) {
    njson o;
    switch (m.kind) {
        case MetricRequest::Kind::latency: o["kind"] = "latency"; break;
        case MetricRequest::Kind::aoi: o["kind"] = "aoi"; break;
        case MetricRequest::Kind::paoi: o["kind"] = "paoi"; break;
        case MetricRequest::Kind::qaoi:
            o["kind"] = "qaoi";
            o["query"] = source_json(m.query);
            break;
        case MetricRequest::Kind::aoii: o["kind"] = "aoii"; break;
        case MetricRequest::Kind::deadline:
            o["kind"] = "deadline";
            o["deadline_ms"] = m.deadline.millis();
            o["earliness_window_ms"] = m.earliness.millis();
            break;
    }
    return o;
}

inline StageSpec parse_stage(const njson& o, const std::string& path) {
    StageSpec s;
    s.name = str(o, "name", path);
    s.latency = parse_dist(need(o, "latency", path), path + ".latency");
    std::string units = str_or(o, "latency_units", path, "s");
    if (units == "s") {
        s.scaling = LatencyScaling::fixed;
    } else if (units == "s_per_mbit") {
        if (s.latency.kind == DistKind::geometric_trials)
            fail(path + ".latency_units", "geometric latency cannot scale per megabit");
        s.scaling = LatencyScaling::per_bit;
        // stored as seconds per bit
        s.latency.a *= 1e-6;
        s.latency.b *= 1e-6;
        for (double& v : s.latency.samples) v *= 1e-6;
    } else {
        fail(path + ".latency_units", "expected 's' or 's_per_mbit'");
    }
    s.output_ratio = num_or(o, "output_ratio", path, 1.0);
    try {
        s.validate();
    } catch (const InvalidDistribution& e) {
        fail(path, e.what());
    }
    return s;
}

inline njson stage_json(const StageSpec& s) {
    njson o;
    o["name"] = s.name;
    if (s.scaling == LatencyScaling::per_bit) {
        DistSpec d = s.latency;
        d.a *= 1e6;
        d.b *= 1e6;
        for (double& v : d.samples) v *= 1e6;
        o["latency"] = dist_json(d);
        o["latency_units"] = "s_per_mbit";
    } else {
        o["latency"] = dist_json(s.latency);
        o["latency_units"] = "s";
    }
    o["output_ratio"] = s.output_ratio;
    return o;
}

inline Fig1Config::Arrivals parse_arrivals(const njson& o, const std::string& path,
                                           const char* periodic_key, std::uint64_t* period,
                                           double* prob) {
    std::string kind = str(o, "kind", path);
    if (kind == "never") return Fig1Config::Arrivals::never;
    if (kind == "always") return Fig1Config::Arrivals::always;
    if (kind == "periodic") {
        *period = req_uint(o, periodic_key, path);
        return Fig1Config::Arrivals::periodic;
    }
    if (kind == "bernoulli") {
        *prob = num(o, "prob", path);
        return Fig1Config::Arrivals::bernoulli;
    }
    fail(path + ".kind", "unknown arrival kind '" + kind + "'");
}

inline njson arrivals_json(Fig1Config::Arrivals a, std::uint64_t period, double prob) {
    njson o;
    switch (a) {
        case Fig1Config::Arrivals::never: o["kind"] = "never"; break;
        case Fig1Config::Arrivals::always: o["kind"] = "always"; break;
        case Fig1Config::Arrivals::periodic:
            o["kind"] = "periodic";
            o["period_slots"] = period;
            break;
        case Fig1Config::Arrivals::bernoulli:
            o["kind"] = "bernoulli";
            o["prob"] = prob;
            break;
    }
    return o;
}

}  // namespace cfg

inline Scenario load_scenario_json(const njson& root);

// Parses scenario text; syntax problems surface as ParseError with the line
// and column, semantic problems as ValidationError naming the field.
inline Scenario load_scenario_text(const std::string& text) {
    njson root;
    try {
        root = njson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        if (byte > text.size()) byte = text.size();
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string why = e.what();
        if (auto tag = why.find("] "); tag != std::string::npos) why = why.substr(tag + 2);
        if (auto at = why.find(": "); at != std::string::npos &&
                                      why.compare(0, 14, "parse error at") == 0)
            why = why.substr(at + 2);
        throw ParseError("parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + why);
    }
    return load_scenario_json(root);
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_text(buf.str());
}

inline Scenario load_scenario_json(const njson& root) {
    using namespace cfg;
    if (!root.is_object()) fail("$", "scenario must be an object");
    Scenario sc;
    sc.name = str_or(root, "name", "$", "unnamed");
    sc.description = str_or(root, "description", "$", "");
    sc.seed = uint_or(root, "seed", "$", 1);
    sc.horizon = Span::from_seconds(num_or(root, "horizon_s", "$", 10.0));
    if (sc.horizon.ns <= 0) fail("$.horizon_s", "horizon must be > 0");

    ChannelTable table(root, "$");
    const njson& ex = need(root, "experiment", "$");
    const std::string path = "$.experiment";
    std::string kind = str(ex, "kind", path);

    if (kind == "one_way") {
        sc.kind = Scenario::Kind::one_way;
        sc.one_way.source = parse_source(need(ex, "source", path), path + ".source");
        sc.one_way.queue =
            ex.contains("queue") ? parse_queue(ex.at("queue"), path + ".queue")
                                 : QueueSpec::fcfs();
        sc.one_way.channel = table.resolve(ex, "channel", path);
        sc.one_way.retransmit = flag_or(ex, "retransmit", path, true);
        if (ex.contains("process"))
            sc.one_way.process = parse_process(ex.at("process"), path + ".process");
        if (sc.one_way.source.kind == SourceKind::event_threshold &&
            !sc.one_way.process)
            fail(path + ".process", "event_threshold source needs a process");
    } else if (kind == "two_way") {
        sc.kind = Scenario::Kind::two_way;
        Channel ch = table.resolve(ex, "channel", path);
        if (!std::holds_alternative<ShannonChannel>(ch))
            fail(path + ".channel", "two_way needs a shannon channel");
        sc.two_way.channel = std::get<ShannonChannel>(ch);
        sc.two_way.mode = str_or(ex, "mode", path, "push") == "pull" ? TwoWayMode::pull
                                                                     : TwoWayMode::push;
        sc.two_way.data_bits = uint_or(ex, "data_bits", path, 1000);
        sc.two_way.ack_bits = uint_or(ex, "ack_bits", path, 100);
        sc.two_way.request_bits = uint_or(ex, "request_bits", path, 100);
        sc.two_way.split_k = num_or(ex, "split_k", path, 0.5);
        sc.two_way.round_channel_uses = uint_or(ex, "round_channel_uses", path, 1000);
        sc.two_way.data_success = num_or(ex, "data_success_prob", path, -1.0);
        sc.two_way.ack_success = num_or(ex, "ack_success_prob", path, -1.0);
        sc.two_way.request_success = num_or(ex, "request_success_prob", path, -1.0);
        sc.two_way_transfers = uint_or(ex, "transfers", path, 10000);
        try {
            sc.two_way.validate();
        } catch (const Error& e) {
            fail(path, e.what());
        }
    } else if (kind == "loop") {
        sc.kind = Scenario::Kind::loop;
        sc.loop.source = parse_source(need(ex, "source", path), path + ".source");
        if (sc.loop.source.kind == SourceKind::event_threshold)
            fail(path + ".source.kind", "loop source must be periodic or poisson");
        sc.loop.uplink = table.resolve(ex, "uplink", path);
        sc.loop.downlink = table.resolve(ex, "downlink", path);
        sc.loop.uplink_retransmit = flag_or(ex, "uplink_retransmit", path, true);
        sc.loop.downlink_retransmit = flag_or(ex, "downlink_retransmit", path, true);
        sc.loop.controller_compute =
            Span::from_millis(num_or(ex, "controller_compute_ms", path, 0.0));
        if (sc.loop.controller_compute.ns < 0)
            fail(path + ".controller_compute_ms", "compute span must be >= 0");
    } else if (kind == "estimation") {
        sc.kind = Scenario::Kind::estimation;
        sc.estimation.source = parse_source(need(ex, "source", path), path + ".source");
        if (sc.estimation.source.kind == SourceKind::event_threshold)
            fail(path + ".source.kind", "estimation source must be periodic or poisson");
        sc.estimation.process =
            parse_process(need(ex, "process", path), path + ".process");
        sc.estimation.channel = table.resolve(ex, "channel", path);
        sc.estimation.retransmit = flag_or(ex, "retransmit", path, true);
        sc.estimation.tick = Span::from_millis(num_or(ex, "tick_ms", path, 10.0));
        sc.estimation.age_bin = Span::from_millis(num_or(ex, "age_bin_ms", path, 10.0));
        sc.estimation.age_bins =
            static_cast<std::size_t>(uint_or(ex, "age_bins", path, 200));
        if (sc.estimation.tick.ns <= 0) fail(path + ".tick_ms", "tick must be > 0");
        if (sc.estimation.age_bin.ns <= 0 || sc.estimation.age_bins == 0)
            fail(path + ".age_bin_ms", "age binning must be positive");
    } else if (kind == "pipeline") {
        sc.kind = Scenario::Kind::pipeline;
        std::string variant = str_or(ex, "variant", path, "independent");
        const njson& stages = need(ex, "stages", path);
        if (!stages.is_array() || stages.empty())
            fail(path + ".stages", "expected a non-empty array");
        for (std::size_t i = 0; i < stages.size(); ++i)
            sc.pipeline.stages.push_back(
                parse_stage(stages[i], path + ".stages[" + std::to_string(i) + "]"));
        sc.pipeline.input_bits = uint_or(ex, "input_size_bits", path, 1000000);
        sc.pipeline.runs = uint_or(ex, "runs", path, 10000);
        if (variant == "independent") {
            sc.pipeline.variant = PipelineScenario::Variant::independent;
        } else if (variant == "coupled") {
            sc.pipeline.variant = PipelineScenario::Variant::coupled;
            const njson& c = need(ex, "coupling", path);
            const std::string cp = path + ".coupling";
            sc.pipeline.coupling.trigger_stage =
                static_cast<std::size_t>(req_uint(c, "trigger_stage", cp));
            sc.pipeline.coupling.target_stage =
                static_cast<std::size_t>(req_uint(c, "target_stage", cp));
            sc.pipeline.coupling.fire_prob = num_or(c, "fire_prob", cp, 1.0);
            sc.pipeline.coupling.metadata_latency =
                Span::from_millis(num_or(c, "metadata_latency_ms", cp, 0.0));
            sc.pipeline.coupling.latency_factor = num_or(c, "latency_factor", cp, 1.0);
            sc.pipeline.has_coupling = true;
            if (sc.pipeline.coupling.trigger_stage >= sc.pipeline.stages.size() ||
                sc.pipeline.coupling.target_stage >= sc.pipeline.stages.size())
                fail(cp, "coupling references a missing stage");
        } else if (variant == "merged") {
            sc.pipeline.variant = PipelineScenario::Variant::merged;
            sc.pipeline.merge_at = static_cast<std::size_t>(req_uint(ex, "merge_at", path));
            sc.pipeline.merged =
                parse_stage(need(ex, "merged_stage", path), path + ".merged_stage");
            sc.pipeline.has_merged = true;
            if (sc.pipeline.merge_at + 1 >= sc.pipeline.stages.size())
                fail(path + ".merge_at", "merge needs an adjacent stage pair");
        } else {
            fail(path + ".variant", "expected independent, coupled or merged");
        }
    } else if (kind == "consensus") {
        sc.kind = Scenario::Kind::consensus;
        ConsensusConfig& c = sc.consensus.cfg;
        c.n = static_cast<std::uint32_t>(uint_or(ex, "nodes", path, 6));
        c.contact_budget = static_cast<std::uint32_t>(uint_or(ex, "contact_budget", path, 2));
        c.initiator = static_cast<std::uint32_t>(uint_or(ex, "initiator", path, 0));
        c.max_rounds = static_cast<std::uint32_t>(uint_or(ex, "max_rounds", path, 1000));
        if (ex.contains("graph")) {
            const njson& g = ex.at("graph");
            if (g.is_string()) {
                if (g.get<std::string>() != "complete")
                    fail(path + ".graph", "expected 'complete' or an edge list");
            } else if (g.is_object() && g.contains("edges")) {
                for (const auto& e : g.at("edges"))
                    c.edges.push_back({e.at(0).get<std::uint32_t>(),
                                       e.at(1).get<std::uint32_t>()});
            } else {
                fail(path + ".graph", "expected 'complete' or an edge list");
            }
        }
        const njson& init = need(ex, "initial_opinions", path);
        if (init.is_array()) {
            for (const auto& v : init)
                c.initial.push_back(static_cast<std::uint8_t>(v.get<int>() ? 1 : 0));
        } else if (init.is_object() && init.contains("ones")) {
            std::uint64_t ones = init.at("ones").get<std::uint64_t>();
            if (ones > c.n) fail(path + ".initial_opinions.ones", "more ones than nodes");
            c.initial.assign(c.n, 0);
            for (std::uint64_t i = 0; i < ones; ++i) c.initial[i] = 1;
        } else {
            fail(path + ".initial_opinions", "expected an array or {\"ones\": k}");
        }
        if (ex.contains("stubborn"))
            for (const auto& v : ex.at("stubborn"))
                c.stubborn.push_back(static_cast<std::uint8_t>(v.get<int>() ? 1 : 0));
        sc.consensus.runs = uint_or(ex, "runs", path, 1000);
        try {
            c.validate();
        } catch (const ValidationError& e) {
            fail(path, e.what());
        }
    } else if (kind == "fedsim") {
        sc.kind = Scenario::Kind::fedsim;
        std::string mode = str_or(ex, "mode", path, "train");
        if (mode == "train")
            sc.fed.mode = FedScenario::Mode::train;
        else if (mode == "reliability")
            sc.fed.mode = FedScenario::Mode::reliability;
        else if (mode == "rate_check")
            sc.fed.mode = FedScenario::Mode::rate_check;
        else
            fail(path + ".mode", "expected train, reliability or rate_check");

        const njson& dv = need(ex, "devices", path);
        if (dv.is_array()) {
            for (std::size_t i = 0; i < dv.size(); ++i) {
                const std::string dp = path + ".devices[" + std::to_string(i) + "]";
                DeviceProfile d;
                d.compute = parse_dist(need(dv[i], "compute", dp), dp + ".compute");
                d.upload = parse_dist(need(dv[i], "upload", dp), dp + ".upload");
                sc.fed.devices.push_back(std::move(d));
            }
        } else if (dv.is_object()) {
            const std::string dp = path + ".devices";
            std::uint64_t count = req_uint(dv, "count", dp);
            if (count == 0) fail(dp + ".count", "need at least one device");
            DeviceProfile d;
            d.compute = parse_dist(need(dv, "compute", dp), dp + ".compute");
            d.upload = parse_dist(need(dv, "upload", dp), dp + ".upload");
            sc.fed.devices.assign(count, d);
        } else {
            fail(path + ".devices", "expected an array or {count, compute, upload}");
        }

        if (ex.contains("policy")) {
            const njson& p = ex.at("policy");
            const std::string pp = path + ".policy";
            std::string pk = str(p, "kind", pp);
            if (pk == "none") {
                sc.fed.policy = StragglerPolicy::no_policy();
            } else if (pk == "lazy") {
                sc.fed.policy =
                    StragglerPolicy::lazy(num(p, "gradient_norm_threshold", pp));
            } else if (pk == "reduced_frequency") {
                std::vector<std::size_t> ids;
                for (const auto& v : need(p, "straggler_ids", pp))
                    ids.push_back(v.get<std::size_t>());
                sc.fed.policy = StragglerPolicy::reduced_frequency(
                    std::move(ids), uint_or(p, "every_m", pp, 2));
                for (std::size_t id : sc.fed.policy.straggler_ids)
                    if (id >= sc.fed.devices.size())
                        fail(pp + ".straggler_ids", "straggler id out of range");
            } else {
                fail(pp + ".kind", "expected none, lazy or reduced_frequency");
            }
        }

        const njson& tk = need(ex, "task", path);
        const std::string tp = path + ".task";
        QuadraticTask& t = sc.fed.task;
        t.dim = static_cast<std::size_t>(uint_or(tk, "dim", tp, 1));
        t.w_opt.assign(t.dim, 0.0);
        t.w0.assign(t.dim, 1.0);
        if (tk.contains("w_opt")) {
            t.w_opt.clear();
            for (const auto& v : tk.at("w_opt")) t.w_opt.push_back(v.get<double>());
        }
        if (tk.contains("w0")) {
            t.w0.clear();
            for (const auto& v : tk.at("w0")) t.w0.push_back(v.get<double>());
        }
        if (tk.contains("device_offsets"))
            for (const auto& row : tk.at("device_offsets")) {
                std::vector<double> off;
                for (const auto& v : row) off.push_back(v.get<double>());
                t.device_offsets.push_back(std::move(off));
            }
        t.noise_scale = num_or(tk, "noise_scale", tp, 0.0);
        t.batch = num_or(tk, "batch", tp, 1.0);
        t.step_mu = num_or(tk, "step_mu", tp, 1.0);
        t.threshold_delta = num_or(tk, "threshold_delta", tp, 1e-3);
        try {
            t.validate(sc.fed.devices.size());
        } catch (const Error& e) {
            fail(tp, e.what());
        }

        sc.fed.rounds = uint_or(ex, "rounds", path, 10);
        sc.fed.trials = uint_or(ex, "trials", path, 100);
        sc.fed.c3 = num_or(ex, "c3", path, 1.0);
        if (ex.contains("round_grid"))
            for (const auto& v : ex.at("round_grid"))
                sc.fed.round_grid.push_back(v.get<std::uint64_t>());
        if (ex.contains("target_prob"))
            sc.fed.target_prob = num(ex, "target_prob", path);
        if (sc.fed.mode == FedScenario::Mode::reliability && sc.fed.round_grid.empty())
            fail(path + ".round_grid", "reliability mode needs a round grid");
        if (sc.fed.mode == FedScenario::Mode::rate_check && sc.fed.round_grid.size() < 4)
            fail(path + ".round_grid", "rate_check needs at least four grid points");
    } else if (kind == "fig1") {
        sc.kind = Scenario::Kind::fig1;
        sc.fig1_scheme = str_or(ex, "scheme", path, "both");
        if (sc.fig1_scheme != "both" && sc.fig1_scheme != "reservation" &&
            sc.fig1_scheme != "pull")
            fail(path + ".scheme", "expected reservation, pull or both");
        sc.fig1.reservation_period_slots =
            uint_or(ex, "reservation_period_slots", path, 4);
        sc.fig1.horizon_slots = uint_or(ex, "horizon_slots", path, 10000);
        sc.fig1.slot = Span::from_millis(num_or(ex, "slot_ms", path, 1.0));
        if (ex.contains("updates"))
            sc.fig1.updates = cfg::parse_arrivals(ex.at("updates"), path + ".updates",
                                                  "period_slots",
                                                  &sc.fig1.update_period_slots,
                                                  &sc.fig1.update_prob);
        if (ex.contains("query"))
            sc.fig1.query = cfg::parse_arrivals(ex.at("query"), path + ".query",
                                                "period_slots",
                                                &sc.fig1.query_period_slots,
                                                &sc.fig1.query_prob);
        try {
            sc.fig1.validate();
        } catch (const ValidationError& e) {
            fail(path, e.what());
        }
    } else {
        fail(path + ".kind", "unknown experiment kind '" + kind + "'");
    }

    if (root.contains("metrics")) {
        if (sc.kind != Scenario::Kind::one_way)
            fail("$.metrics", "metric requests apply to one_way experiments only");
        const njson& ms = root.at("metrics");
        if (!ms.is_array()) fail("$.metrics", "expected an array");
        for (std::size_t i = 0; i < ms.size(); ++i)
            sc.metrics.push_back(
                cfg::parse_metric(ms[i], "$.metrics[" + std::to_string(i) + "]"));
        for (const MetricRequest& m : sc.metrics)
            if (m.kind == MetricRequest::Kind::aoii) {
                if (!sc.one_way.process ||
                    sc.one_way.process->kind != ProcessKind::two_state_markov)
                    fail("$.metrics", "aoii needs a two_state_markov process");
            }
    }
    if (sc.kind == Scenario::Kind::one_way && sc.metrics.empty()) {
        MetricRequest lat;
        lat.kind = MetricRequest::Kind::latency;
        MetricRequest aoi;
        aoi.kind = MetricRequest::Kind::aoi;
        sc.metrics = {lat, aoi};
    }
    return sc;
}

// Fully defaulted scenario back as JSON; loading this again reproduces the
// exact same run.
inline njson effective_config(const Scenario& sc) {
    using namespace cfg;
    njson root;
    root["name"] = sc.name;
    if (!sc.description.empty()) root["description"] = sc.description;
    root["seed"] = sc.seed;
    root["horizon_s"] = sc.horizon.seconds();

    njson ex;
    switch (sc.kind) {
        case Scenario::Kind::one_way: {
            ex["kind"] = "one_way";
            ex["source"] = source_json(sc.one_way.source);
            ex["queue"] = queue_json(sc.one_way.queue);
            ex["channel"] = channel_json(sc.one_way.channel);
            ex["retransmit"] = sc.one_way.retransmit;
            if (sc.one_way.process) ex["process"] = process_json(*sc.one_way.process);
            break;
        }
        case Scenario::Kind::two_way: {
            ex["kind"] = "two_way";
            ex["mode"] = sc.two_way.mode == TwoWayMode::pull ? "pull" : "push";
            ex["channel"] = channel_json(Channel{sc.two_way.channel});
            ex["data_bits"] = sc.two_way.data_bits;
            ex["ack_bits"] = sc.two_way.ack_bits;
            ex["request_bits"] = sc.two_way.request_bits;
            ex["split_k"] = sc.two_way.split_k;
            ex["round_channel_uses"] = sc.two_way.round_channel_uses;
            if (sc.two_way.data_success >= 0.0)
                ex["data_success_prob"] = sc.two_way.data_success;
            if (sc.two_way.ack_success >= 0.0)
                ex["ack_success_prob"] = sc.two_way.ack_success;
            if (sc.two_way.request_success >= 0.0)
                ex["request_success_prob"] = sc.two_way.request_success;
            ex["transfers"] = sc.two_way_transfers;
            break;
        }
        case Scenario::Kind::loop: {
            ex["kind"] = "loop";
            ex["source"] = source_json(sc.loop.source);
            ex["uplink"] = channel_json(sc.loop.uplink);
            ex["downlink"] = channel_json(sc.loop.downlink);
            ex["uplink_retransmit"] = sc.loop.uplink_retransmit;
            ex["downlink_retransmit"] = sc.loop.downlink_retransmit;
            ex["controller_compute_ms"] = sc.loop.controller_compute.millis();
            break;
        }
        case Scenario::Kind::estimation: {
            ex["kind"] = "estimation";
            ex["source"] = source_json(sc.estimation.source);
            ex["process"] = process_json(sc.estimation.process);
            ex["channel"] = channel_json(sc.estimation.channel);
            ex["retransmit"] = sc.estimation.retransmit;
            ex["tick_ms"] = sc.estimation.tick.millis();
            ex["age_bin_ms"] = sc.estimation.age_bin.millis();
            ex["age_bins"] = sc.estimation.age_bins;
            break;
        }
        case Scenario::Kind::pipeline: {
            ex["kind"] = "pipeline";
            switch (sc.pipeline.variant) {
                case PipelineScenario::Variant::independent:
                    ex["variant"] = "independent";
                    break;
                case PipelineScenario::Variant::coupled: ex["variant"] = "coupled"; break;
                case PipelineScenario::Variant::merged: ex["variant"] = "merged"; break;
            }
            njson stages = njson::array();
            for (const auto& s : sc.pipeline.stages) stages.push_back(stage_json(s));
            ex["stages"] = stages;
            ex["input_size_bits"] = sc.pipeline.input_bits;
            ex["runs"] = sc.pipeline.runs;
            if (sc.pipeline.has_coupling) {
                njson c;
                c["trigger_stage"] = sc.pipeline.coupling.trigger_stage;
                c["target_stage"] = sc.pipeline.coupling.target_stage;
                c["fire_prob"] = sc.pipeline.coupling.fire_prob;
                c["metadata_latency_ms"] = sc.pipeline.coupling.metadata_latency.millis();
                c["latency_factor"] = sc.pipeline.coupling.latency_factor;
                ex["coupling"] = c;
            }
            if (sc.pipeline.has_merged) {
                ex["merge_at"] = sc.pipeline.merge_at;
                ex["merged_stage"] = stage_json(sc.pipeline.merged);
            }
            break;
        }
        case Scenario::Kind::consensus: {
            const ConsensusConfig& c = sc.consensus.cfg;
            ex["kind"] = "consensus";
            ex["nodes"] = c.n;
            ex["contact_budget"] = c.contact_budget;
            if (c.edges.empty()) {
                ex["graph"] = "complete";
            } else {
                njson edges = njson::array();
                for (auto [a, b] : c.edges) edges.push_back(njson::array({a, b}));
                ex["graph"] = njson{{"edges", edges}};
            }
            ex["initial_opinions"] = c.initial;
            ex["initiator"] = c.initiator;
            ex["max_rounds"] = c.max_rounds;
            if (!c.stubborn.empty()) ex["stubborn"] = c.stubborn;
            ex["runs"] = sc.consensus.runs;
            break;
        }
        case Scenario::Kind::fedsim: {
            ex["kind"] = "fedsim";
            switch (sc.fed.mode) {
                case FedScenario::Mode::train: ex["mode"] = "train"; break;
                case FedScenario::Mode::reliability: ex["mode"] = "reliability"; break;
                case FedScenario::Mode::rate_check: ex["mode"] = "rate_check"; break;
            }
            njson devices = njson::array();
            for (const auto& d : sc.fed.devices) {
                njson dd;
                dd["compute"] = dist_json(d.compute);
                dd["upload"] = dist_json(d.upload);
                devices.push_back(dd);
            }
            ex["devices"] = devices;
            njson pol;
            switch (sc.fed.policy.kind) {
                case StragglerPolicy::Kind::none: pol["kind"] = "none"; break;
                case StragglerPolicy::Kind::lazy:
                    pol["kind"] = "lazy";
                    pol["gradient_norm_threshold"] =
                        sc.fed.policy.gradient_norm_threshold;
                    break;
                case StragglerPolicy::Kind::reduced_frequency:
                    pol["kind"] = "reduced_frequency";
                    pol["straggler_ids"] = sc.fed.policy.straggler_ids;
                    pol["every_m"] = sc.fed.policy.every_m;
                    break;
            }
            ex["policy"] = pol;
            njson task;
            task["dim"] = sc.fed.task.dim;
            task["w_opt"] = sc.fed.task.w_opt;
            task["w0"] = sc.fed.task.w0;
            if (!sc.fed.task.device_offsets.empty())
                task["device_offsets"] = sc.fed.task.device_offsets;
            task["noise_scale"] = sc.fed.task.noise_scale;
            task["batch"] = sc.fed.task.batch;
            task["step_mu"] = sc.fed.task.step_mu;
            task["threshold_delta"] = sc.fed.task.threshold_delta;
            ex["task"] = task;
            ex["rounds"] = sc.fed.rounds;
            if (!sc.fed.round_grid.empty()) ex["round_grid"] = sc.fed.round_grid;
            ex["trials"] = sc.fed.trials;
            if (sc.fed.target_prob) ex["target_prob"] = *sc.fed.target_prob;
            ex["c3"] = sc.fed.c3;
            break;
        }
        case Scenario::Kind::fig1: {
            ex["kind"] = "fig1";
            ex["scheme"] = sc.fig1_scheme;
            ex["reservation_period_slots"] = sc.fig1.reservation_period_slots;
            ex["horizon_slots"] = sc.fig1.horizon_slots;
            ex["slot_ms"] = sc.fig1.slot.millis();
            ex["updates"] = cfg::arrivals_json(sc.fig1.updates, sc.fig1.update_period_slots,
                                               sc.fig1.update_prob);
            ex["query"] = cfg::arrivals_json(sc.fig1.query, sc.fig1.query_period_slots,
                                             sc.fig1.query_prob);
            break;
        }
    }
    root["experiment"] = ex;
    if (!sc.metrics.empty()) {
        njson ms = njson::array();
        for (const auto& m : sc.metrics) ms.push_back(cfg::metric_json(m));
        root["metrics"] = ms;
    }
    return root;
}

inline std::string effective_config_text(const Scenario& sc) {
    return effective_config(sc).dump(2) + "\n";
}

}  // namespace tempo
