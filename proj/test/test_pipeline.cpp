#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tempo/pipeline.hpp"

using namespace tempo;

namespace {

StageSpec fixed_stage(const std::string& name, DistSpec d, double ratio = 1.0) {
    StageSpec s;
    s.name = name;
    s.latency = std::move(d);
    s.output_ratio = ratio;
    return s;
}

StageSpec per_bit_stage(const std::string& name, DistSpec d, double ratio = 1.0) {
    StageSpec s = fixed_stage(name, std::move(d), ratio);
    s.scaling = LatencyScaling::per_bit;
    return s;
}

}  // namespace

TEST_CASE("stage output sizes round half away from zero") {
    StageSpec s = fixed_stage("s", DistSpec::deterministic(0.0), 0.5);
    CHECK(s.output_bits(1000) == 500);
    CHECK(s.output_bits(1001) == 501);
    CHECK(s.output_bits(1) == 1);
    StageSpec z = fixed_stage("z", DistSpec::deterministic(0.0), 0.0);
    CHECK(z.output_bits(12345) == 0);
}

TEST_CASE("deterministic cascade composes spans and sizes exactly") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("sense", DistSpec::deterministic(0.001)));
    stages.push_back(per_bit_stage("encode", DistSpec::deterministic(2.0e-6), 0.5));
    stages.push_back(fixed_stage("send", DistSpec::deterministic(0.004)));

    RngStream rng(1, "cascade");
    auto r = compose_independent(stages, 1000, rng);
    REQUIRE(r.stages.size() == 3);
    CHECK(r.stages[0].span.ns == 1'000'000);
    CHECK(r.stages[1].span.ns == 2'000'000);  // 2 us per bit on 1000 bits
    CHECK(r.stages[2].span.ns == 4'000'000);
    CHECK(r.total.ns == 7'000'000);
    CHECK(r.stages[0].input_bits == 1000);
    CHECK(r.stages[1].output_bits == 500);
    CHECK(r.stages[2].input_bits == 500);
    CHECK_FALSE(r.coupling_fired);
}

TEST_CASE("total span is the exact integer sum of stage spans") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::exponential(500.0)));
    stages.push_back(per_bit_stage("b", DistSpec::uniform(1.0e-7, 3.0e-7), 0.8));
    stages.push_back(fixed_stage("c", DistSpec::uniform(0.001, 0.002)));

    RngStream rng(9, "sum");
    for (int t = 0; t < 2000; ++t) {
        auto r = compose_independent(stages, 4321, rng);
        std::int64_t sum = 0;
        for (const auto& st : r.stages) sum += st.span.ns;
        REQUIRE(r.total.ns == sum);
    }
}

TEST_CASE("cascade rejects empty stage lists and bad coupling indices") {
    RngStream rng(1, "bad");
    CHECK_THROWS_AS(compose_independent({}, 100, rng), InvalidDistribution);

    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::deterministic(0.001)));
    CouplingSpec c;
    c.trigger_stage = 0;
    c.target_stage = 3;
    c.fire_prob = 0.5;
    CHECK_THROWS_AS(compose_coupled(stages, c, 100, rng), InvalidDistribution);
}

TEST_CASE("a coupling that never fires leaves the stream untouched") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::exponential(300.0)));
    stages.push_back(fixed_stage("b", DistSpec::uniform(0.001, 0.003)));

    CouplingSpec c;
    c.trigger_stage = 0;
    c.target_stage = 1;
    c.fire_prob = 0.0;
    c.metadata_latency = Span::from_millis(10);
    c.latency_factor = 5.0;

    RngStream r1(42, "pair");
    RngStream r2(42, "pair");
    for (int t = 0; t < 500; ++t) {
        auto ind = compose_independent(stages, 1000, r1);
        auto cpl = compose_coupled(stages, c, 1000, r2);
        REQUIRE(cpl.total.ns == ind.total.ns);
        REQUIRE_FALSE(cpl.coupling_fired);
    }
}

TEST_CASE("a certain coupling fires without consuming a draw") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::exponential(300.0)));
    stages.push_back(fixed_stage("b", DistSpec::uniform(0.001, 0.003)));

    CouplingSpec c;
    c.trigger_stage = 0;
    c.target_stage = 1;
    c.fire_prob = 1.0;
    c.metadata_latency = Span::from_millis(1);
    c.latency_factor = 1.0;  // isolate the metadata term

    RngStream r1(7, "pair");
    RngStream r2(7, "pair");
    for (int t = 0; t < 500; ++t) {
        auto ind = compose_independent(stages, 1000, r1);
        auto cpl = compose_coupled(stages, c, 1000, r2);
        REQUIRE(cpl.coupling_fired);
        REQUIRE(cpl.total.ns == ind.total.ns + 1'000'000);
        REQUIRE(cpl.stages[0].span.ns == ind.stages[0].span.ns);
        REQUIRE(cpl.stages[1].span.ns == ind.stages[1].span.ns);
    }
}

TEST_CASE("coupling scales the target stage only") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::deterministic(0.002)));
    stages.push_back(fixed_stage("b", DistSpec::deterministic(0.004)));
    stages.push_back(fixed_stage("c", DistSpec::deterministic(0.008)));

    CouplingSpec c;
    c.trigger_stage = 0;
    c.target_stage = 1;
    c.fire_prob = 1.0;
    c.metadata_latency = Span::from_millis(3);
    c.latency_factor = 1.5;

    RngStream rng(3, "scale");
    auto r = compose_coupled(stages, c, 100, rng);
    CHECK(r.stages[0].span.ns == 2'000'000);
    CHECK(r.stages[1].span.ns == 6'000'000);
    CHECK(r.stages[2].span.ns == 8'000'000);
    CHECK(r.total.ns == 19'000'000);
}

TEST_CASE("merging an adjacent pair requires pathwise dominance") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("front", DistSpec::deterministic(0.001), 0.5));
    stages.push_back(fixed_stage("left", DistSpec::uniform(0.002, 0.003)));
    stages.push_back(fixed_stage("right", DistSpec::uniform(0.003, 0.004)));

    StageSpec merged = fixed_stage("joint", DistSpec::uniform(0.004, 0.005));
    RngStream rng(5, "merge");
    auto r = compose_merged(stages, 1, merged, 1000, rng);
    REQUIRE(r.stages.size() == 2);
    CHECK(r.stages[1].name == "joint");

    // Pathwise bound: every merged realization stays below every split one.
    RngStream ra(11, "m1");
    RngStream rb(11, "m1");
    for (int t = 0; t < 500; ++t) {
        auto split = compose_independent(stages, 1000, ra);
        auto joint = compose_merged(stages, 1, merged, 1000, rb);
        REQUIRE(joint.total.ns <= split.total.ns);
    }

    StageSpec too_slow = fixed_stage("joint", DistSpec::uniform(0.004, 0.0051));
    RngStream rc(5, "merge");
    CHECK_THROWS_AS(compose_merged(stages, 1, too_slow, 1000, rc), MergedNotDominant);
}

TEST_CASE("merged dominance accounts for per-bit scaling on the size chain") {
    // front halves the payload, so the pair sees 500 bits.
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("front", DistSpec::deterministic(0.001), 0.5));
    stages.push_back(per_bit_stage("left", DistSpec::uniform(4.0e-6, 6.0e-6)));
    stages.push_back(fixed_stage("right", DistSpec::deterministic(0.001)));

    // split min on 500 bits: 4e-6 * 500 + 0.001 = 3 ms
    StageSpec ok = fixed_stage("joint", DistSpec::deterministic(0.003));
    RngStream rng(2, "bits");
    CHECK_NOTHROW(compose_merged(stages, 1, ok, 1000, rng));

    StageSpec no = fixed_stage("joint", DistSpec::deterministic(0.0031));
    CHECK_THROWS_AS(compose_merged(stages, 1, no, 1000, rng), MergedNotDominant);

    CHECK_THROWS_AS(compose_merged(stages, 2, ok, 1000, rng), InvalidDistribution);
}

TEST_CASE("independent stage spans decorrelate") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::exponential(200.0)));
    stages.push_back(fixed_stage("b", DistSpec::exponential(400.0)));
    stages.push_back(fixed_stage("c", DistSpec::uniform(0.001, 0.005)));

    RngStream rng(19, "corr");
    double r01 = stage_span_correlation(stages, 0, 1, 20000, rng, 1000);
    double r02 = stage_span_correlation(stages, 0, 2, 20000, rng, 1000);
    CHECK(std::abs(r01) < 0.03);
    CHECK(std::abs(r02) < 0.03);

    CHECK_THROWS_AS(stage_span_correlation(stages, 0, 5, 100, rng, 1000), InvalidDistribution);
    CHECK_THROWS_AS(stage_span_correlation(stages, 0, 1, 1, rng, 1000), EmptySample);
}

TEST_CASE("a firing coupling induces positive cross-stage correlation") {
    std::vector<StageSpec> stages;
    stages.push_back(fixed_stage("a", DistSpec::uniform(0.001, 0.002)));
    stages.push_back(fixed_stage("b", DistSpec::uniform(0.001, 0.002)));

    CouplingSpec c;
    c.trigger_stage = 0;
    c.target_stage = 1;
    c.fire_prob = 0.5;
    c.latency_factor = 8.0;

    RngStream rng(23, "cc");
    const int n = 20000;
    std::vector<double> fired(n), span(n);
    for (int t = 0; t < n; ++t) {
        auto r = compose_coupled(stages, c, 1000, rng);
        fired[t] = r.coupling_fired ? 1.0 : 0.0;
        span[t] = r.stages[1].span.seconds();
    }
    double mf = 0, ms = 0;
    for (int t = 0; t < n; ++t) { mf += fired[t]; ms += span[t]; }
    mf /= n; ms /= n;
    double num = 0;
    for (int t = 0; t < n; ++t) num += (fired[t] - mf) * (span[t] - ms);
    CHECK(num / n > 0.0);
    CHECK(mf == Catch::Approx(0.5).margin(0.02));
}
