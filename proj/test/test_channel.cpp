#include <catch_amalgamated.hpp>

#include <cmath>

#include <tempo/channel.hpp>

using namespace tempo;

TEST_CASE("shannon channel rounds blocks up") {
    ShannonChannel ch{1e6, 0.0, 1.0};
    CHECK(ch.channel_uses(1000) == 1000);
    ShannonChannel coded{1e6, 0.0, 3.0};
    CHECK(coded.channel_uses(1000) == 334);
    CHECK(coded.channel_uses(999) == 333);
    CHECK(ch.tx_time(1000).ns == 500000);  // 1000 uses over 2 MHz of uses
    CHECK(ch.tx_time(1).ns == 500);
}

TEST_CASE("shannon attempts take exactly the block time") {
    ShannonChannel ch{1e6, 0.0, 1.0};
    Channel c = ch;
    RngStream r(1, "ch");
    for (int i = 0; i < 50; ++i) {
        Attempt a = sample_attempt(c, 1000, r);
        CHECK(a.duration.ns == 500000);
        CHECK(a.success);
    }
    ShannonChannel lossy{1e6, 1.0, 1.0};
    Channel cl = lossy;
    Attempt a = sample_attempt(cl, 1000, r);
    CHECK_FALSE(a.success);
}

TEST_CASE("sampled attempts clamp to a nanosecond") {
    SampledChannel sc{DistSpec::deterministic(0.0), 1.0};
    Channel c = sc;
    RngStream r(2, "ch");
    Attempt a = sample_attempt(c, 10, r);
    CHECK(a.duration.ns == 1);
    CHECK(a.success);

    SampledChannel fixed{DistSpec::deterministic(0.002), 1.0};
    Channel cf = fixed;
    CHECK(sample_attempt(cf, 10, r).duration.ns == 2000000);
}

TEST_CASE("channel validation rejects bad parameters") {
    CHECK_THROWS_AS(validate(Channel{ShannonChannel{0.0, 0.0, 1.0}}),
                    InvalidDistribution);
    CHECK_THROWS_AS(validate(Channel{ShannonChannel{1e6, 1.5, 1.0}}),
                    InvalidDistribution);
    CHECK_THROWS_AS(validate(Channel{SampledChannel{DistSpec::exponential(-1.0), 1.0}}),
                    InvalidDistribution);
    CHECK_THROWS_AS(validate(Channel{SampledChannel{DistSpec::deterministic(0.001), 2.0}}),
                    InvalidDistribution);
}

TEST_CASE("analytic latency-reliability without retransmission is a step") {
    Channel c = ShannonChannel{1e6, 0.1, 1.0};
    const Span T = Span{500000};
    CHECK(latency_reliability(c, 1000, T - Span{1}, false) == 0.0);
    CHECK(latency_reliability(c, 1000, T, false) == Catch::Approx(0.9));
    CHECK(latency_reliability(c, 1000, Span::from_seconds(1.0), false) ==
          Catch::Approx(0.9));
}

TEST_CASE("analytic latency-reliability with retransmission is geometric") {
    Channel c = ShannonChannel{1e6, 0.1, 1.0};
    const Span T = Span{500000};
    CHECK(latency_reliability(c, 1000, Span{T.ns * 3}, true) == Catch::Approx(0.999));
    CHECK(latency_reliability(c, 1000, Span{T.ns * 2 + T.ns / 2}, true) ==
          Catch::Approx(0.99));
    CHECK(latency_reliability(c, 1000, Span{T.ns - 1}, true) == 0.0);
}

TEST_CASE("analytic curve needs a closed form") {
    Channel c = SampledChannel{DistSpec::exponential(100.0), 0.9};
    CHECK_THROWS_AS(latency_reliability(c, 10, Span::from_millis(1.0), false),
                    Unsupported);
    Channel fixed = SampledChannel{DistSpec::deterministic(0.001), 0.8};
    CHECK(latency_reliability(fixed, 10, Span::from_millis(1.0), false) ==
          Catch::Approx(0.8));
}

TEST_CASE("step curves are right-continuous with a plateau") {
    StepCurve curve = empirical_latency_reliability({
        {Span::from_millis(1.0), true},
        {Span::from_millis(2.0), false},
        {Span::from_millis(3.0), true},
    });
    CHECK(curve.eval(Span::from_micros(500.0)) == 0.0);
    CHECK(curve.eval(Span::from_millis(1.0)) == Catch::Approx(1.0 / 3.0));
    CHECK(curve.eval(Span::from_millis(2.9)) == Catch::Approx(1.0 / 3.0));
    CHECK(curve.eval(Span::from_millis(3.0)) == Catch::Approx(2.0 / 3.0));
    CHECK(curve.eval(Span::from_seconds(9.0)) == Catch::Approx(2.0 / 3.0));
    CHECK(curve.plateau() == Catch::Approx(2.0 / 3.0));

    double prev = -1.0;
    for (const auto& b : curve.breakpoints()) {
        double v = curve.eval(Span{b.at_ns});
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("empirical curve tracks the analytic one") {
    Channel c = ShannonChannel{1e6, 0.2, 1.0};
    RngStream r(17, "curve");
    std::vector<std::pair<Span, bool>> samples;
    Instant t0 = Instant::origin();
    for (int i = 0; i < 20000; ++i) {
        Instant t = t0;
        bool ok = false;
        for (int tries = 0; tries < 200; ++tries) {
            Attempt a = sample_attempt(c, 1000, r);
            t += a.duration;
            if (a.success) {
                ok = true;
                break;
            }
        }
        samples.push_back({t - t0, ok});
    }
    StepCurve curve = empirical_latency_reliability(std::move(samples));
    for (int k = 1; k <= 8; ++k) {
        Span tau = Span{500000 * k};
        double analytic = latency_reliability(c, 1000, tau, true);
        CHECK(curve.eval(tau) == Catch::Approx(analytic).margin(0.02));
    }
}
