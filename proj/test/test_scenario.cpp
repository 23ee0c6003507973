#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "tempo/library.hpp"
#include "tempo/scenario.hpp"

using namespace tempo;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string msg_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an error");
    return "";
}

}  // namespace

TEST_CASE("every built-in scenario loads and echoes a stable config") {
    for (const auto& b : builtin_scenarios()) {
        INFO(b.name);
        Scenario sc = load_scenario_text(b.text);
        CHECK(sc.name == b.name);
        njson once = effective_config(sc);
        Scenario again = load_scenario_json(once);
        njson twice = effective_config(again);
        CHECK(once == twice);
        CHECK(effective_config_text(sc).back() == '\n');
    }
}

TEST_CASE("built-in scenarios mirror the files shipped in scenarios/") {
    for (const auto& b : builtin_scenarios()) {
        INFO(b.name);
        std::string disk = read_file(std::string(TEMPO_SCENARIO_DIR) + "/" + b.name + ".json");
        CHECK(disk == b.text);
    }
    CHECK(find_builtin("mm1_baseline") != nullptr);
    CHECK(find_builtin("no_such_scenario") == nullptr);
}

TEST_CASE("syntax errors carry the line and column") {
    std::string bad = "{\n  \"name\": \"x\",\n  \"experiment\": {,}\n}\n";
    std::string m = msg_of([&] { load_scenario_text(bad); });
    CHECK(m.find("line 3") != std::string::npos);
    CHECK(m.find("column") != std::string::npos);

    CHECK_THROWS_AS(load_scenario_text("[1, 2]"), ValidationError);  // wrong shape
    CHECK_THROWS_AS(load_scenario_text("{"), ParseError);
    CHECK_THROWS_AS(load_scenario_file("/nonexistent/path.json"), ParseError);
}

TEST_CASE("semantic errors name the offending field") {
    auto expect = [](const std::string& text, const std::string& needle) {
        std::string m;
        try {
            load_scenario_text(text);
        } catch (const ValidationError& e) {
            m = e.what();
        }
        INFO(m);
        CHECK(m.find(needle) != std::string::npos);
    };

    expect(R"({"name": "x"})", "$.experiment");
    expect(R"({"experiment": {"kind": "warp"}})", "unknown experiment kind");
    expect(R"({"experiment": {"kind": "one_way",
              "source": {"kind": "periodic", "period_ms": 10},
              "channel": "missing_link"}})",
           "dangling channel reference 'missing_link'");
    expect(R"({"experiment": {"kind": "one_way",
              "source": {"kind": "event_threshold", "threshold": 0.5},
              "channel": {"kind": "sampled",
                          "delay": {"kind": "deterministic", "value_s": 0.001},
                          "success_prob": 1.0}}})",
           "process");
    expect(R"({"experiment": {"kind": "two_way",
              "channel": {"kind": "shannon", "bandwidth_hz": 1e6,
                          "block_error_prob": 0.1}},
              "metrics": [{"kind": "latency"}]})",
           "$.metrics");
    expect(R"({"experiment": {"kind": "fedsim", "mode": "reliability",
              "devices": {"count": 2,
                          "compute": {"kind": "deterministic", "value_s": 0.01},
                          "upload": {"kind": "deterministic", "value_s": 0.01}},
              "task": {"w_opt": [0], "w0": [1]}}})",
           "round_grid");
    expect(R"({"experiment": {"kind": "fedsim", "mode": "rate_check",
              "round_grid": [4, 8, 16],
              "devices": {"count": 2,
                          "compute": {"kind": "deterministic", "value_s": 0.01},
                          "upload": {"kind": "deterministic", "value_s": 0.01}},
              "task": {"w_opt": [0], "w0": [1]}}})",
           "at least four");
}

TEST_CASE("aoii requires a two-state process on the source side") {
    std::string text = R"({"experiment": {"kind": "one_way",
        "source": {"kind": "periodic", "period_ms": 10},
        "channel": {"kind": "sampled",
                    "delay": {"kind": "deterministic", "value_s": 0.001},
                    "success_prob": 1.0}},
        "metrics": [{"kind": "aoii"}]})";
    std::string m;
    try {
        load_scenario_text(text);
    } catch (const ValidationError& e) {
        m = e.what();
    }
    CHECK(m.find("two_state_markov") != std::string::npos);
}

TEST_CASE("qaoi queries must be periodic or poisson") {
    std::string text = R"({"experiment": {"kind": "one_way",
        "source": {"kind": "periodic", "period_ms": 10},
        "channel": {"kind": "sampled",
                    "delay": {"kind": "deterministic", "value_s": 0.001},
                    "success_prob": 1.0}},
        "metrics": [{"kind": "qaoi",
                     "query": {"kind": "event_threshold", "threshold": 1.0}}]})";
    CHECK_THROWS_AS(load_scenario_text(text), ValidationError);
}

TEST_CASE("a minimal one-way scenario fills every default") {
    Scenario sc = load_scenario_text(R"({"experiment": {"kind": "one_way",
        "source": {"kind": "periodic", "period_ms": 100},
        "channel": {"kind": "sampled",
                    "delay": {"kind": "deterministic", "value_s": 0.002},
                    "success_prob": 1.0}}})");
    CHECK(sc.name == "unnamed");
    CHECK(sc.seed == 1);
    CHECK(sc.horizon.ns == 10'000'000'000);
    CHECK(sc.kind == Scenario::Kind::one_way);
    CHECK(sc.one_way.queue.kind == QueueKind::fcfs);
    CHECK(sc.one_way.queue.capacity == 0);
    CHECK(sc.one_way.retransmit);
    REQUIRE(sc.metrics.size() == 2);
    CHECK(sc.metrics[0].kind == MetricRequest::Kind::latency);
    CHECK(sc.metrics[1].kind == MetricRequest::Kind::aoi);

    njson e = effective_config(sc);
    CHECK(e["seed"] == 1);
    CHECK(e["horizon_s"] == 10.0);
    CHECK(e["experiment"]["retransmit"] == true);
}

TEST_CASE("named channels resolve from the channel table") {
    Scenario sc = load_scenario_text(R"({
        "channels": {"air": {"kind": "shannon", "bandwidth_hz": 1e5,
                             "block_error_prob": 0.1}},
        "experiment": {"kind": "one_way",
                       "source": {"kind": "periodic", "period_ms": 100},
                       "channel": "air"}})");
    REQUIRE(std::holds_alternative<ShannonChannel>(sc.one_way.channel));
    CHECK(std::get<ShannonChannel>(sc.one_way.channel).bandwidth_hz == 1e5);
}

TEST_CASE("per-megabit stage latencies scale into seconds per bit") {
    Scenario sc = load_scenario_text(R"({"experiment": {"kind": "pipeline",
        "variant": "independent", "input_bits": 1000000, "runs": 10,
        "stages": [
          {"name": "fix", "latency": {"kind": "deterministic", "value_s": 0.001}},
          {"name": "enc", "latency": {"kind": "deterministic", "value_s": 2.0},
           "latency_units": "s_per_mbit"}]}})");
    REQUIRE(sc.pipeline.stages.size() == 2);
    CHECK(sc.pipeline.stages[1].scaling == LatencyScaling::per_bit);
    // 2 s per megabit on a megabit payload is 2 seconds.
    RngStream rng(1, "x");
    CHECK(sc.pipeline.stages[1].sample_span(1000000, rng).ns == 2'000'000'000);

    std::string bad = R"({"experiment": {"kind": "pipeline",
        "variant": "independent", "input_bits": 1000, "runs": 10,
        "stages": [
          {"name": "enc", "latency": {"kind": "geometric_trials", "success_prob": 0.5},
           "latency_units": "s_per_mbit"}]}})";
    CHECK_THROWS_AS(load_scenario_text(bad), ValidationError);
}

TEST_CASE("unsuffixed or mistyped fields are rejected") {
    CHECK_THROWS_AS(load_scenario_text(R"({"seed": -3, "experiment": {"kind": "one_way",
        "source": {"kind": "periodic", "period_ms": 10},
        "channel": {"kind": "sampled",
                    "delay": {"kind": "deterministic", "value_s": 0.001},
                    "success_prob": 1.0}}})"),
                    ValidationError);
    CHECK_THROWS_AS(load_scenario_text(R"({"horizon_s": 0, "experiment": {"kind": "one_way",
        "source": {"kind": "periodic", "period_ms": 10},
        "channel": {"kind": "sampled",
                    "delay": {"kind": "deterministic", "value_s": 0.001},
                    "success_prob": 1.0}}})"),
                    ValidationError);
    CHECK_THROWS_AS(load_scenario_text(R"({"experiment": {"kind": "one_way",
        "source": {"kind": "periodic"},
        "channel": {"kind": "sampled",
                    "delay": {"kind": "deterministic", "value_s": 0.001},
                    "success_prob": 1.0}}})"),
                    ValidationError);
}

TEST_CASE("consensus scenarios expand opinion shorthand") {
    Scenario sc = load_scenario_text(R"({"experiment": {"kind": "consensus",
        "nodes": 6, "contact_budget": 2, "graph": "complete",
        "initial_opinions": {"ones": 4}, "runs": 10, "max_rounds": 50}})");
    REQUIRE(sc.consensus.cfg.initial.size() == 6);
    std::uint32_t ones = 0;
    for (auto o : sc.consensus.cfg.initial) ones += o;
    CHECK(ones == 4);
    CHECK(sc.consensus.runs == 10);
    CHECK(sc.consensus.cfg.max_rounds == 50);
}

TEST_CASE("fedsim device shorthand replicates a profile") {
    Scenario sc = load_scenario_text(R"({"experiment": {"kind": "fedsim", "mode": "train",
        "rounds": 5,
        "devices": {"count": 3,
                    "compute": {"kind": "exponential", "rate_per_s": 20},
                    "upload": {"kind": "deterministic", "value_s": 0.05}},
        "task": {"w_opt": [0.0], "w0": [1.0], "step_mu": 0.5}}})");
    REQUIRE(sc.fed.devices.size() == 3);
    CHECK(sc.fed.rounds == 5);
    CHECK(sc.fed.task.step_mu == 0.5);
    CHECK(sc.fed.task.dim == 1);
}
