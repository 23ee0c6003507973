#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tempo/fedsim.hpp"

using namespace tempo;

namespace {

DeviceProfile det_device(double compute_s, double upload_s) {
    DeviceProfile d;
    d.compute = DistSpec::deterministic(compute_s);
    d.upload = DistSpec::deterministic(upload_s);
    return d;
}

QuadraticTask scalar_task(double w0, double mu, double noise = 0.0) {
    QuadraticTask t;
    t.dim = 1;
    t.w_opt = {0.0};
    t.w0 = {w0};
    t.step_mu = mu;
    t.noise_scale = noise;
    return t;
}

}  // namespace

TEST_CASE("per-device round streams are stateless and well separated") {
    RngStream a = fed_stream(9, 3, 7, fed_salt_gradient);
    RngStream b = fed_stream(9, 3, 7, fed_salt_gradient);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() == b.next_u64());

    CHECK(fed_stream(9, 3, 7, fed_salt_gradient).next_u64() !=
          fed_stream(9, 4, 7, fed_salt_gradient).next_u64());
    CHECK(fed_stream(9, 3, 7, fed_salt_gradient).next_u64() !=
          fed_stream(9, 3, 8, fed_salt_gradient).next_u64());
    CHECK(fed_stream(9, 3, 7, fed_salt_gradient).next_u64() !=
          fed_stream(9, 3, 7, fed_salt_latency).next_u64());
}

TEST_CASE("deterministic device spans add compute and upload") {
    auto d = det_device(0.005, 0.006);
    CHECK(device_round_span(d, 1, 0, 0).ns == 11'000'000);
    CHECK(device_round_span(d, 999, 5, 42).ns == 11'000'000);
}

TEST_CASE("synchronous round latency waits for the slowest participant") {
    std::vector<DeviceProfile> devices{det_device(0.005, 0.006), det_device(0.013, 0.008)};

    CHECK(round_latency(devices, std::vector<bool>{true, true}, 0, 1).ns == 21'000'000);
    CHECK(round_latency(devices, std::vector<bool>{true, false}, 0, 1).ns == 11'000'000);
    CHECK_THROWS_AS(round_latency(devices, std::vector<bool>{false, false}, 0, 1),
                    NoParticipants);

    auto policy = StragglerPolicy::reduced_frequency({1}, 2);
    CHECK(round_latency(devices, policy, 0, 1).ns == 21'000'000);
    CHECK(round_latency(devices, policy, 1, 1).ns == 11'000'000);
}

TEST_CASE("excluding devices never raises the round latency") {
    std::vector<DeviceProfile> devices;
    for (int k = 0; k < 6; ++k) {
        DeviceProfile d;
        d.compute = DistSpec::exponential(50.0);
        d.upload = DistSpec::uniform(0.001, 0.02);
        devices.push_back(d);
    }
    auto policy = StragglerPolicy::reduced_frequency({0, 3, 4}, 3);
    auto none = StragglerPolicy::no_policy();
    for (std::uint64_t seed = 1; seed <= 30; ++seed)
        for (std::uint64_t round = 0; round < 9; ++round)
            REQUIRE(round_latency(devices, policy, round, seed).ns <=
                    round_latency(devices, none, round, seed).ns);
}

TEST_CASE("learning latency is the exact span sum") {
    std::vector<Span> spans{Span{123456789}, Span{1}, Span{999999999}, Span{42}};
    CHECK(learning_latency(spans).ns == 123456789 + 1 + 999999999 + 42);
    CHECK(learning_latency({}).ns == 0);
}

TEST_CASE("a noiseless quadratic with unit step converges in one round") {
    QuadraticTask t;
    t.dim = 2;
    t.w_opt = {1.25, -0.5};
    t.w0 = {3.5, 2.0};
    t.step_mu = 1.0;
    std::vector<DeviceProfile> devices{det_device(0.001, 0.001), det_device(0.002, 0.001)};

    auto r = train_quadratic(t, devices, StragglerPolicy::no_policy(), 1, 3);
    REQUIRE(r.grad_norm_trace.size() == 3);
    CHECK(r.grad_norm_trace[0] == 0.0);
    REQUIRE(r.converged_after.has_value());
    CHECK(*r.converged_after == 1);
    CHECK(r.w_final[0] == 1.25);
    CHECK(r.w_final[1] == -0.5);
}

TEST_CASE("device offsets cancel through the mean in the residual norm") {
    QuadraticTask t = scalar_task(1.0, 0.5);
    t.device_offsets = {{0.1}, {-0.1}};
    std::vector<DeviceProfile> devices{det_device(0.001, 0.001), det_device(0.002, 0.001)};

    auto r = train_quadratic(t, devices, StragglerPolicy::no_policy(), 7, 3);
    REQUIRE(r.grad_norm_trace.size() == 3);
    CHECK(r.grad_norm_trace[0] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(r.grad_norm_trace[1] == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(r.grad_norm_trace[2] == Catch::Approx(0.125).epsilon(1e-12));
    CHECK(r.participants_trace == std::vector<std::uint32_t>{2, 2, 2});
    CHECK(r.round_latency_trace[0].ns == 3'000'000);
    CHECK(r.learning_latency.ns == 9'000'000);
}

TEST_CASE("reduced-frequency stragglers push stale gradients") {
    QuadraticTask t = scalar_task(1.0, 0.25);
    std::vector<DeviceProfile> devices{det_device(0.001, 0.001), det_device(0.005, 0.005)};
    auto policy = StragglerPolicy::reduced_frequency({1}, 2);

    auto r = train_quadratic(t, devices, policy, 3, 3);
    // Round 0: both on the fresh view. Round 1: device 1 sits out.
    // Round 2: device 1 evaluates the view it kept from round 0.
    CHECK(r.grad_norm_trace[0] == Catch::Approx(0.75).epsilon(1e-12));
    CHECK(r.grad_norm_trace[1] == Catch::Approx(0.5625).epsilon(1e-12));
    CHECK(r.grad_norm_trace[2] == Catch::Approx(0.3984375).epsilon(1e-12));
    CHECK(r.participants_trace == std::vector<std::uint32_t>{2, 1, 2});
    CHECK(r.round_latency_trace[0].ns == 10'000'000);
    CHECK(r.round_latency_trace[1].ns == 2'000'000);
    CHECK(r.round_latency_trace[2].ns == 10'000'000);
}

TEST_CASE("lazy devices opt out below the gradient threshold") {
    QuadraticTask t = scalar_task(0.2, 0.5);
    std::vector<DeviceProfile> devices{det_device(0.005, 0.006), det_device(0.013, 0.008)};
    auto policy = StragglerPolicy::lazy(0.1);

    auto r = train_quadratic(t, devices, policy, 5, 4);
    CHECK(r.grad_norm_trace[0] == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(r.grad_norm_trace[1] == Catch::Approx(0.05).epsilon(1e-12));
    CHECK(r.grad_norm_trace[2] == Catch::Approx(0.05).epsilon(1e-12));
    CHECK(r.grad_norm_trace[3] == Catch::Approx(0.05).epsilon(1e-12));
    CHECK(r.participants_trace == std::vector<std::uint32_t>{2, 2, 0, 0});
    // Zero-update rounds cost nothing.
    CHECK(r.round_latency_trace[2].ns == 0);
    CHECK(r.learning_latency.ns == 42'000'000);
    CHECK_FALSE(r.converged_after.has_value());
}

TEST_CASE("task validation rejects inconsistent setups") {
    std::vector<DeviceProfile> devices{det_device(0.001, 0.001)};
    QuadraticTask t = scalar_task(1.0, 0.5);
    t.w_opt = {0.0, 0.0};
    CHECK_THROWS_AS(train_quadratic(t, devices, StragglerPolicy::no_policy(), 1, 1),
                    ValidationError);

    t = scalar_task(1.0, 0.0);
    CHECK_THROWS_AS(train_quadratic(t, devices, StragglerPolicy::no_policy(), 1, 1),
                    InvalidStep);

    t = scalar_task(1.0, 0.5);
    t.batch = 0.5;
    CHECK_THROWS_AS(train_quadratic(t, devices, StragglerPolicy::no_policy(), 1, 1),
                    ValidationError);

    t = scalar_task(1.0, 0.5);
    t.device_offsets = {{0.1}, {0.2}};
    CHECK_THROWS_AS(train_quadratic(t, devices, StragglerPolicy::no_policy(), 1, 1),
                    ValidationError);

    t = scalar_task(1.0, 0.5);
    CHECK_THROWS_AS(train_quadratic(t, {}, StragglerPolicy::no_policy(), 1, 1),
                    NoParticipants);
}

TEST_CASE("the reliability curve is a non-decreasing hitting-time cdf") {
    QuadraticTask t = scalar_task(1.0, 0.3, 0.5);
    t.threshold_delta = 0.05;
    std::vector<DeviceProfile> devices{det_device(0.001, 0.001), det_device(0.002, 0.003)};

    auto curve = round_reliability(t, devices, StragglerPolicy::no_policy(), 17,
                                   {2, 4, 8, 16, 32}, 60, 0.5);
    REQUIRE(curve.points.size() == 5);
    CHECK(curve.trials == 60);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].f_c >= 0.0);
        CHECK(curve.points[i].f_c <= 1.0);
        if (i > 0) CHECK(curve.points[i].f_c >= curve.points[i - 1].f_c);
    }
    if (curve.n_star) {
        for (const auto& pt : curve.points) {
            if (pt.n_rounds < *curve.n_star) CHECK(pt.f_c < 0.5);
            if (pt.n_rounds == *curve.n_star) CHECK(pt.f_c >= 0.5);
        }
    }

    auto again = round_reliability(t, devices, StragglerPolicy::no_policy(), 17,
                                   {2, 4, 8, 16, 32}, 60, 0.5);
    for (std::size_t i = 0; i < curve.points.size(); ++i)
        CHECK(curve.points[i].f_c == again.points[i].f_c);

    CHECK_THROWS_AS(round_reliability(t, devices, StragglerPolicy::no_policy(), 17, {}, 60),
                    InsufficientGrid);
    CHECK_THROWS_AS(round_reliability(t, devices, StragglerPolicy::no_policy(), 17, {4}, 0),
                    EmptySample);
}

TEST_CASE("an exact inverse-sqrt decay passes the rate check") {
    std::vector<RatePoint> pts;
    for (std::uint64_t n : {16ull, 64ull, 256ull, 1024ull}) {
        RatePoint p;
        p.n_rounds = n;
        p.avg_grad_norm = {2.0 / std::sqrt(static_cast<double>(n))};
        pts.push_back(p);
    }
    auto rc = convergence_rate_check(pts);
    CHECK(rc.slope == Catch::Approx(-0.5).epsilon(1e-9));
    CHECK(rc.c_envelope == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(rc.consistent);

    CHECK_THROWS_AS(convergence_rate_check({pts[0], pts[1], pts[2]}), InsufficientGrid);
}

TEST_CASE("a slow decay fails the rate check") {
    std::vector<RatePoint> pts;
    for (std::uint64_t n : {16ull, 64ull, 256ull, 1024ull}) {
        RatePoint p;
        p.n_rounds = n;
        p.avg_grad_norm = {std::pow(static_cast<double>(n), -0.2)};
        pts.push_back(p);
    }
    auto rc = convergence_rate_check(pts);
    CHECK(rc.slope == Catch::Approx(-0.2).epsilon(1e-6));
    CHECK_FALSE(rc.consistent);
}

TEST_CASE("rate ensembles scale the step with the horizon") {
    QuadraticTask t = scalar_task(1.0, 1.0, 0.3);
    std::vector<DeviceProfile> devices{det_device(0.001, 0.001)};
    auto p16 = run_rate_point(t, devices, StragglerPolicy::no_policy(), 23, 16, 40, 0.8);
    auto p256 = run_rate_point(t, devices, StragglerPolicy::no_policy(), 23, 256, 40, 0.8);
    REQUIRE(p16.avg_grad_norm.size() == 40);
    REQUIRE(p256.avg_grad_norm.size() == 40);
    double m16 = 0, m256 = 0;
    for (double v : p16.avg_grad_norm) m16 += v;
    for (double v : p256.avg_grad_norm) m256 += v;
    CHECK(m256 / 40.0 < m16 / 40.0);
}
