#include <catch2/catch_amalgamated.hpp>

#include "tempo/metrics.hpp"

using namespace tempo;

namespace {

Instant at_ms(std::int64_t ms) { return Instant::origin() + Span::from_millis(ms); }

Reception rec_ms(std::int64_t delivered, std::int64_t anchor) {
    return Reception{at_ms(delivered), at_ms(anchor)};
}

// Anchors 0/10/20 ms delivered at 2/13/24 ms, measured to 30 ms. The area
// under the sawtooth is 218 ms^2 over a 28 ms window.
AoIProcess sample_process(bool from_origin = false) {
    return AoIProcess::from_receptions({rec_ms(2, 0), rec_ms(13, 10), rec_ms(24, 20)},
                                       at_ms(30), from_origin);
}

DeliveryRecord delivery(std::uint64_t seq, std::int64_t anchor_ms,
                        std::optional<std::int64_t> delivered_ms, double value,
                        std::uint64_t bits = 1000) {
    DeliveryRecord r;
    r.seq = seq;
    r.generated_at = at_ms(anchor_ms);
    r.size_bits = bits;
    if (delivered_ms) {
        r.delivered_at = at_ms(*delivered_ms);
        r.fate = PacketFate::delivered;
    }
    r.sample = {value};
    return r;
}

}  // namespace

TEST_CASE("sawtooth mean age matches the exact area computation") {
    auto p = sample_process();
    CHECK(p.mean_seconds() == Catch::Approx(109.0 / 14.0 * 1e-3).epsilon(1e-12));
    CHECK(p.window_start().ns == 2'000'000);
    CHECK(p.window_end().ns == 30'000'000);

    auto peaks = p.peaks();
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].ns == 13'000'000);
    CHECK(peaks[1].ns == 14'000'000);
}

TEST_CASE("age is right-continuous at receptions") {
    auto p = sample_process();
    CHECK(p.age_at(at_ms(5)).ns == 5'000'000);
    CHECK(p.age_at(at_ms(13)).ns == 3'000'000);   // drop applies at the instant
    CHECK(p.age_at(at_ms(24)).ns == 4'000'000);
    CHECK(p.age_at(at_ms(29)).ns == 9'000'000);
    CHECK(p.drops().size() == 3);
    CHECK(p.drops()[0].before.ns == 0);
    CHECK(p.drops()[1].before.ns == 13'000'000);
    CHECK(p.drops()[1].after.ns == 3'000'000);
}

TEST_CASE("measuring from the origin prepends the startup ramp") {
    auto p = sample_process(true);
    CHECK(p.window_start().ns == 0);
    // Extra triangle: age ramps 0 to 2 ms before the first delivery.
    CHECK(p.mean_seconds() == Catch::Approx(22.0 / 3.0 * 1e-3).epsilon(1e-12));
}

TEST_CASE("stale receptions leave the age process untouched") {
    auto base = sample_process();
    auto with_stale = AoIProcess::from_receptions(
        {rec_ms(2, 0), rec_ms(13, 10), rec_ms(15, 5), rec_ms(24, 20)}, at_ms(30));
    CHECK(with_stale.drops().size() == 3);
    CHECK(with_stale.mean_seconds() == base.mean_seconds());
}

TEST_CASE("age process demands at least one reception") {
    CHECK_THROWS_AS(AoIProcess::from_receptions({}, at_ms(10)), NoDeliveries);
    CHECK_NOTHROW(AoIProcess::from_receptions({}, at_ms(10), true));
    auto single = AoIProcess::from_receptions({rec_ms(2, 0)}, at_ms(10));
    CHECK_THROWS_AS(single.peaks(), InsufficientDeliveries);
}

TEST_CASE("receptions after the window end are ignored") {
    auto p = AoIProcess::from_receptions({rec_ms(2, 0), rec_ms(13, 10), rec_ms(31, 20)},
                                         at_ms(30));
    CHECK(p.drops().size() == 2);
}

TEST_CASE("query age samples the sawtooth at chosen instants") {
    auto p = sample_process();
    auto s = query_aoi(p, std::vector<Instant>{at_ms(5), at_ms(13), at_ms(29)});
    CHECK(s.count() == 3);
    CHECK(s.mean() == Catch::Approx((5.0 + 3.0 + 9.0) / 3.0 * 1e-3));

    // Queries outside the window carry no defined age.
    auto clipped = query_aoi(p, std::vector<Instant>{at_ms(1), at_ms(5), at_ms(31)});
    CHECK(clipped.count() == 1);
    CHECK_THROWS_AS(query_aoi(p, std::vector<Instant>{at_ms(1)}), NoQueriesInWindow);
}

TEST_CASE("spec-driven queries reject event-triggered generators") {
    auto p = sample_process();
    RngStream rng(1, "q");
    CHECK_THROWS_AS(query_aoi(p, SourceSpec::on_deviation(0.5), rng), InvalidDistribution);
    auto s = query_aoi(p, SourceSpec::periodic_every(Span::from_millis(7)), rng);
    // Periodic instants at 7/14/21/28 ms all land inside the window.
    CHECK(s.count() == 4);
    CHECK(s.mean() == Catch::Approx((7.0 + 4.0 + 11.0 + 8.0) / 4.0 * 1e-3));
}

TEST_CASE("mismatch age integrates only unmatched stretches") {
    std::vector<TrailPoint> trail{
        {at_ms(0), 0.0}, {at_ms(8), 1.0}, {at_ms(20), 0.0}};
    DeliveryTrace tr;
    tr.window_end = at_ms(30);
    tr.records.push_back(delivery(0, 0, 2, 0.0));
    tr.records.push_back(delivery(1, 10, 13, 1.0));
    tr.records.push_back(delivery(2, 22, 25, 0.0));

    auto r = aoii(trail, tr);
    CHECK(r.time_avg_s == Catch::Approx(25.0 / 28.0 * 1e-3).epsilon(1e-12));
    CHECK(r.max_s == Catch::Approx(5.0e-3).epsilon(1e-12));
}

TEST_CASE("a source flipping back resolves the mismatch without a delivery") {
    std::vector<TrailPoint> trail{
        {at_ms(0), 0.0}, {at_ms(8), 1.0}, {at_ms(20), 0.0}};
    DeliveryTrace tr;
    tr.window_end = at_ms(30);
    tr.records.push_back(delivery(0, 0, 2, 0.0));

    auto r = aoii(trail, tr);
    CHECK(r.time_avg_s == Catch::Approx(18.0 / 7.0 * 1e-3).epsilon(1e-12));
    CHECK(r.max_s == Catch::Approx(12.0e-3).epsilon(1e-12));

    CHECK_THROWS_AS(aoii({}, tr), EmptySample);
    DeliveryTrace none;
    none.window_end = at_ms(30);
    none.records.push_back(delivery(0, 0, std::nullopt, 0.0));
    CHECK_THROWS_AS(aoii(trail, none), NoDeliveries);
}

TEST_CASE("deadline metrics split violations from early arrivals") {
    DeliveryTrace tr;
    tr.window_end = at_ms(100);
    tr.records.push_back(delivery(0, 0, 6, 0.0));    // within, too early
    tr.records.push_back(delivery(1, 20, 28, 0.0));  // within and on time
    tr.records.push_back(delivery(2, 40, 52, 0.0));  // late
    tr.records.push_back(delivery(3, 60, std::nullopt, 0.0));

    auto m = deadline_metrics(tr, Span::from_millis(10), Span::from_millis(3));
    CHECK(m.generated == 4);
    CHECK(m.within_deadline == 2);
    CHECK(m.on_time == 1);
    CHECK(m.violation_prob == Catch::Approx(0.5));
    CHECK(m.on_time_fraction == Catch::Approx(0.25));
    CHECK(m.timely_throughput_bits_per_s == Catch::Approx(2000.0 / 0.1));

    CHECK_THROWS_AS(deadline_metrics(tr, Span::from_millis(-1), Span::zero()),
                    InvalidDistribution);
    DeliveryTrace empty;
    empty.window_end = at_ms(100);
    CHECK_THROWS_AS(deadline_metrics(empty, Span::from_millis(10), Span::zero()),
                    NoDeliveries);
}

TEST_CASE("zero earliness window means on-time equals exactly-at-deadline") {
    DeliveryTrace tr;
    tr.window_end = at_ms(100);
    tr.records.push_back(delivery(0, 0, 10, 0.0));  // latency == deadline
    tr.records.push_back(delivery(1, 20, 29, 0.0)); // 9 ms, early
    auto m = deadline_metrics(tr, Span::from_millis(10), Span::zero());
    CHECK(m.within_deadline == 2);
    CHECK(m.on_time == 1);
}

TEST_CASE("hold-last squared error aggregates by sample age") {
    std::vector<PathPoint> path;
    for (int i = 0; i <= 4; ++i)
        path.push_back(PathPoint{Instant::origin() + Span::from_seconds(double(i)),
                                 {static_cast<double>(i)}});
    DeliveryTrace tr;
    tr.window_end = Instant::origin() + Span::from_seconds(4.0);
    DeliveryRecord d0;
    d0.seq = 0;
    d0.generated_at = Instant::origin();
    d0.delivered_at = Instant::origin() + Span::from_seconds(1.0);
    d0.fate = PacketFate::delivered;
    d0.sample = {0.0};
    DeliveryRecord d1 = d0;
    d1.seq = 1;
    d1.generated_at = Instant::origin() + Span::from_seconds(2.0);
    d1.delivered_at = Instant::origin() + Span::from_seconds(3.0);
    d1.sample = {2.0};
    tr.records.push_back(d0);
    tr.records.push_back(d1);

    auto r = estimation_error(path, tr, Span::from_seconds(1.0), 5);
    CHECK(r.samples == 4);  // the t=0 point predates any delivery
    CHECK(r.time_avg_g == Catch::Approx(2.5));
    REQUIRE(r.curve.size() == 2);
    CHECK(r.curve[0].age_mid_s == Catch::Approx(1.5));
    CHECK(r.curve[0].mean_g == Catch::Approx(1.0));
    CHECK(r.curve[0].count == 2);
    CHECK(r.curve[1].age_mid_s == Catch::Approx(2.5));
    CHECK(r.curve[1].mean_g == Catch::Approx(4.0));
    CHECK(r.curve[1].count == 2);

    CHECK_THROWS_AS(estimation_error({}, tr, Span::from_seconds(1.0), 5), EmptySample);
}

TEST_CASE("age accumulator clamps overflow into the last bin") {
    GAgeAccumulator acc(Span::from_seconds(1.0), 3);
    acc.add(Span::from_seconds(0.2), 1.0);
    acc.add(Span::from_seconds(7.5), 5.0);
    auto r = acc.result();
    CHECK(r.samples == 2);
    CHECK(r.time_avg_g == Catch::Approx(3.0));
    REQUIRE(r.curve.size() == 2);
    CHECK(r.curve[0].age_mid_s == Catch::Approx(0.5));
    CHECK(r.curve[1].age_mid_s == Catch::Approx(2.5));
    CHECK(r.curve[1].mean_g == Catch::Approx(5.0));

    CHECK_THROWS_AS(GAgeAccumulator(Span::zero(), 3), InvalidDistribution);
    CHECK_THROWS_AS(GAgeAccumulator(Span::from_seconds(1.0), 0), InvalidDistribution);
}

TEST_CASE("loop age summarizes closures and counts open cycles") {
    LoopTrace tr;
    LoopRecord a;
    a.cycle = 0;
    a.state_sent_at = at_ms(0);
    a.command_received_at = at_ms(10);
    LoopRecord b;
    b.cycle = 1;
    b.state_sent_at = at_ms(50);
    b.command_received_at = at_ms(70);
    LoopRecord c;
    c.cycle = 2;
    c.state_sent_at = at_ms(100);
    tr.records = {a, b, c};

    auto la = loop_age(tr);
    CHECK(la.closed.count() == 2);
    CHECK(la.closed.mean() == Catch::Approx(0.015));
    CHECK(la.open == 1);

    LoopTrace all_open;
    all_open.records = {c};
    CHECK_THROWS_AS(loop_age(all_open), NoClosedLoops);
}
