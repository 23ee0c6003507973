#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "tempo/dist.hpp"
#include "tempo/errors.hpp"
#include "tempo/rng.hpp"
#include "tempo/time.hpp"

namespace tempo {

struct DeviceProfile {
    DistSpec compute{DistSpec::deterministic(1.0)};
    DistSpec upload{DistSpec::deterministic(1.0)};

    void validate() const {
        compute.validate();
        upload.validate();
    }
};

// Which devices take part in a round. `none` includes everyone every round;
// `reduced_frequency` lets listed stragglers upload only every m-th round;
// `lazy` includes a device only when its local gradient norm reaches the
// threshold, which is decided inside training where gradients exist.
struct StragglerPolicy {
    enum class Kind { none, lazy, reduced_frequency };
    Kind kind{Kind::none};
    double gradient_norm_threshold{0.0};
    std::vector<std::size_t> straggler_ids;
    std::uint64_t every_m{2};

    static StragglerPolicy no_policy() { return {}; }

    static StragglerPolicy lazy(double threshold) {
        StragglerPolicy p;
        p.kind = Kind::lazy;
        p.gradient_norm_threshold = threshold;
        return p;
    }

    static StragglerPolicy reduced_frequency(std::vector<std::size_t> ids,
                                             std::uint64_t every_m) {
        StragglerPolicy p;
        p.kind = Kind::reduced_frequency;
        p.straggler_ids = std::move(ids);
        p.every_m = every_m == 0 ? 1 : every_m;
        return p;
    }

    bool is_straggler(std::size_t device) const {
        return std::find(straggler_ids.begin(), straggler_ids.end(), device) !=
               straggler_ids.end();
    }

    // Schedule-level participation; the lazy filter is orthogonal to this.
    bool scheduled(std::size_t device, std::uint64_t round) const {
        if (kind != Kind::reduced_frequency) return true;
        if (!is_straggler(device)) return true;
        return round % every_m == 0;
    }
};

// Per-(device, round) stream, independent of which rounds the device
// actually joins: excluding a device never shifts anyone else's draws,
// which is what makes policy comparisons seed-pairable.
inline RngStream fed_stream(std::uint64_t seed, std::uint64_t device, std::uint64_t round,
                            std::uint64_t salt) {
    std::uint64_t id = 0x66656473ULL;  // "feds"
    id = detail::rotl(id ^ device, 21) * 0x9e3779b97f4a7c15ULL;
    id = detail::rotl(id ^ round, 21) * 0xbf58476d1ce4e5b9ULL;
    id ^= salt;
    return RngStream(seed, id);
}

constexpr std::uint64_t fed_salt_latency = 0x11;
constexpr std::uint64_t fed_salt_gradient = 0x22;

inline Span device_round_span(const DeviceProfile& dev, std::uint64_t seed,
                              std::uint64_t device, std::uint64_t round) {
    RngStream rng = fed_stream(seed, device, round, fed_salt_latency);
    return draw_span(rng, dev.compute) + draw_span(rng, dev.upload);
}

// Synchronous-round latency: the server waits for the slowest participant.
inline Span round_latency(const std::vector<DeviceProfile>& devices,
                          const std::vector<bool>& participating, std::uint64_t round,
                          std::uint64_t seed) {
    std::optional<Span> worst;
    for (std::size_t k = 0; k < devices.size(); ++k) {
        if (!participating[k]) continue;
        Span s = device_round_span(devices[k], seed, k, round);
        if (!worst || s > *worst) worst = s;
    }
    if (!worst) throw NoParticipants("no device participates in this round");
    return *worst;
}

inline Span round_latency(const std::vector<DeviceProfile>& devices,
                          const StragglerPolicy& policy, std::uint64_t round,
                          std::uint64_t seed) {
    std::vector<bool> part(devices.size());
    for (std::size_t k = 0; k < devices.size(); ++k) part[k] = policy.scheduled(k, round);
    return round_latency(devices, part, round, seed);
}

inline Span learning_latency(const std::vector<Span>& round_spans) {
    Span total = Span::zero();
    for (Span s : round_spans) total += s;
    return total;
}

// L(w) = 0.5 * ||w - w_opt||^2 distributed over K devices. Device k sees
// the optimum shifted by its data offset; its stochastic gradient adds
// i.i.d. noise of scale noise_scale / sqrt(batch) per coordinate.
struct QuadraticTask {
    std::size_t dim{1};
    std::vector<double> w_opt{0.0};
    std::vector<double> w0{0.0};
    std::vector<std::vector<double>> device_offsets;  // optional, K x dim
    double noise_scale{0.0};
    double batch{1.0};
    double step_mu{1.0};
    double threshold_delta{1e-3};

    void validate(std::size_t n_devices) const {
        if (dim == 0 || w_opt.size() != dim || w0.size() != dim)
            throw ValidationError("task dimensions are inconsistent");
        if (!(step_mu > 0.0)) throw InvalidStep("step size must be > 0");
        if (!(threshold_delta > 0.0)) throw ValidationError("threshold must be > 0");
        if (noise_scale < 0.0) throw ValidationError("noise scale must be >= 0");
        if (!(batch >= 1.0)) throw ValidationError("batch must be >= 1");
        if (!device_offsets.empty()) {
            if (device_offsets.size() != n_devices)
                throw ValidationError("offsets must cover all devices");
            for (const auto& o : device_offsets)
                if (o.size() != dim) throw ValidationError("offset dimension mismatch");
        }
    }
};

struct TrainResult {
    std::vector<double> grad_norm_trace;      // ||grad L(w)|| after each round
    std::vector<Span> round_latency_trace;    // zero-update rounds contribute zero
    std::vector<std::uint32_t> participants_trace;
    Span learning_latency{Span::zero()};
    std::vector<double> w_final;
    std::optional<std::uint64_t> converged_after;  // rounds until norm <= delta
};

inline TrainResult train_quadratic(const QuadraticTask& task,
                                   const std::vector<DeviceProfile>& devices,
                                   const StragglerPolicy& policy, std::uint64_t seed,
                                   std::uint64_t n_rounds,
                                   bool stop_at_convergence = false) {
    const std::size_t K = devices.size();
    if (K == 0) throw NoParticipants("need at least one device");
    task.validate(K);
    for (const auto& d : devices) d.validate();

    std::vector<double> w = task.w0;
    std::vector<double> mean_offset(task.dim, 0.0);
    if (!task.device_offsets.empty()) {
        for (const auto& o : task.device_offsets)
            for (std::size_t i = 0; i < task.dim; ++i) mean_offset[i] += o[i];
        for (double& v : mean_offset) v /= static_cast<double>(K);
    }
    // Stale view a reduced-frequency straggler computes against.
    std::vector<std::vector<double>> last_view(K, w);

    const double noise_sd = task.noise_scale / std::sqrt(task.batch);
    TrainResult out;
    std::vector<double> g(task.dim), gk(task.dim);

    for (std::uint64_t n = 0; n < n_rounds; ++n) {
        std::fill(g.begin(), g.end(), 0.0);
        std::uint32_t included = 0;
        std::optional<Span> worst;
        for (std::size_t k = 0; k < K; ++k) {
            if (!policy.scheduled(k, n)) continue;
            const bool stale = policy.kind == StragglerPolicy::Kind::reduced_frequency &&
                               policy.is_straggler(k);
            const std::vector<double>& eval_w = stale ? last_view[k] : w;
            RngStream grng = fed_stream(seed, k, n, fed_salt_gradient);
            double norm2 = 0.0;
            for (std::size_t i = 0; i < task.dim; ++i) {
                double off = task.device_offsets.empty() ? 0.0 : task.device_offsets[k][i];
                gk[i] = eval_w[i] - task.w_opt[i] - off;
                if (noise_sd > 0.0) gk[i] += noise_sd * draw_standard_normal(grng);
                norm2 += gk[i] * gk[i];
            }
            if (policy.kind == StragglerPolicy::Kind::lazy &&
                std::sqrt(norm2) < policy.gradient_norm_threshold)
                continue;
            for (std::size_t i = 0; i < task.dim; ++i) g[i] += gk[i];
            ++included;
            Span s = device_round_span(devices[k], seed, k, n);
            if (!worst || s > *worst) worst = s;
        }

        if (included > 0) {
            for (std::size_t i = 0; i < task.dim; ++i)
                w[i] -= task.step_mu * g[i] / static_cast<double>(included);
        }
        for (std::size_t k = 0; k < K; ++k)
            if (policy.scheduled(k, n)) last_view[k] = w;

        double gn2 = 0.0;
        for (std::size_t i = 0; i < task.dim; ++i) {
            double d = w[i] - task.w_opt[i] - mean_offset[i];
            gn2 += d * d;
        }
        double gn = std::sqrt(gn2);
        out.grad_norm_trace.push_back(gn);
        out.round_latency_trace.push_back(worst.value_or(Span::zero()));
        out.participants_trace.push_back(included);
        if (!out.converged_after && gn <= task.threshold_delta) {
            out.converged_after = n + 1;
            if (stop_at_convergence) break;
        }
    }
    out.learning_latency = learning_latency(out.round_latency_trace);
    out.w_final = std::move(w);
    return out;
}

// F_C(N): fraction of trials converged within N rounds. Training stops at
// the first round whose global gradient norm meets the threshold, so the
// event is a hitting time and the curve is non-decreasing by construction
// under the shared per-trial streams.
struct ReliabilityPoint {
    std::uint64_t n_rounds{0};
    double f_c{0.0};
};

struct ReliabilityCurve {
    std::vector<ReliabilityPoint> points;
    std::optional<std::uint64_t> n_star;
    std::uint64_t trials{0};
};

inline ReliabilityCurve round_reliability(const QuadraticTask& task,
                                          const std::vector<DeviceProfile>& devices,
                                          const StragglerPolicy& policy, std::uint64_t seed,
                                          std::vector<std::uint64_t> n_grid,
                                          std::uint64_t trials,
                                          std::optional<double> p0 = std::nullopt) {
    if (n_grid.empty()) throw InsufficientGrid("empty round grid");
    if (trials == 0) throw EmptySample("need at least one trial");
    std::sort(n_grid.begin(), n_grid.end());
    const std::uint64_t n_max = n_grid.back();

    std::vector<std::uint64_t> hit;
    hit.reserve(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t trial_seed = seed;
        std::uint64_t salt = 0x7472ULL + t;
        trial_seed ^= detail::splitmix64(salt);
        TrainResult r = train_quadratic(task, devices, policy, trial_seed, n_max, true);
        hit.push_back(r.converged_after.value_or(n_max + 1));
    }

    ReliabilityCurve curve;
    curve.trials = trials;
    for (std::uint64_t n : n_grid) {
        std::uint64_t ok = 0;
        for (std::uint64_t h : hit)
            if (h <= n) ++ok;
        double f = static_cast<double>(ok) / static_cast<double>(trials);
        curve.points.push_back({n, f});
        if (p0 && !curve.n_star && f >= *p0) curve.n_star = n;
    }
    return curve;
}

// Ensemble of averaged gradient norms for one horizon N, step c3 / sqrt(N).
struct RatePoint {
    std::uint64_t n_rounds{0};
    std::vector<double> avg_grad_norm;  // one entry per trial
};

inline RatePoint run_rate_point(QuadraticTask task, const std::vector<DeviceProfile>& devices,
                                const StragglerPolicy& policy, std::uint64_t seed,
                                std::uint64_t n_rounds, std::uint64_t trials, double c3) {
    task.step_mu = c3 / std::sqrt(static_cast<double>(n_rounds));
    RatePoint pt;
    pt.n_rounds = n_rounds;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::uint64_t trial_seed = seed;
        std::uint64_t salt = 0x7261ULL + t;
        trial_seed ^= detail::splitmix64(salt);
        TrainResult r = train_quadratic(task, devices, policy, trial_seed, n_rounds, false);
        double s = 0.0;
        for (double gn : r.grad_norm_trace) s += gn;
        pt.avg_grad_norm.push_back(s / static_cast<double>(r.grad_norm_trace.size()));
    }
    return pt;
}

// Log-log fit of E[avg gradient norm] against N. Consistency with a
// 1/sqrt(N) decay means the fitted slope is at most -0.5 plus a 0.1
// tolerance, and every ensemble mean sits under a single c / sqrt(N)
// envelope.
struct RateCheck {
    double slope{0.0};
    double intercept{0.0};
    double c_envelope{0.0};
    bool consistent{false};
};

inline RateCheck convergence_rate_check(const std::vector<RatePoint>& ensembles) {
    if (ensembles.size() < 4)
        throw InsufficientGrid("rate check needs at least four horizon values");
    std::vector<double> lx, ly, means;
    for (const auto& pt : ensembles) {
        if (pt.avg_grad_norm.empty()) throw EmptySample("rate point has no trials");
        double m = 0.0;
        for (double v : pt.avg_grad_norm) m += v;
        m /= static_cast<double>(pt.avg_grad_norm.size());
        means.push_back(m);
        lx.push_back(std::log(static_cast<double>(pt.n_rounds)));
        ly.push_back(std::log(std::max(m, 1e-300)));
    }
    double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    RateCheck rc;
    rc.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rc.intercept = (sy - rc.slope * sx) / n;
    for (std::size_t i = 0; i < means.size(); ++i) {
        double c = means[i] * std::sqrt(static_cast<double>(ensembles[i].n_rounds));
        if (c > rc.c_envelope) rc.c_envelope = c;
    }
    bool under_envelope = true;
    for (std::size_t i = 0; i < means.size(); ++i) {
        double bound = rc.c_envelope / std::sqrt(static_cast<double>(ensembles[i].n_rounds));
        if (means[i] > bound * (1.0 + 1e-12)) under_envelope = false;
    }
    rc.consistent = rc.slope <= -0.4 && under_envelope;
    return rc;
}

}  // namespace tempo
