#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tempo/metrics.hpp"
#include "tempo/scenario.hpp"
#include "tempo/summary.hpp"

namespace tempo {

struct RunOptions {
    bool want_trace{false};
};

struct SawPoint {
    double t_s{0.0};
    double before_s{0.0};
    double after_s{0.0};
};

struct RunReport {
    std::string scenario_name;
    std::uint64_t seed{0};
    double horizon_s{0.0};
    std::vector<MetricRow> rows;
    std::optional<Conservation> conservation;
    njson extra = njson::object();
    std::vector<TraceRow> trace;
    std::vector<SawPoint> sawtooth;
};

namespace detail {

inline std::string tagged(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "." + name;
}

inline void fill_sawtooth(RunReport& rep, const AoIProcess& proc) {
    rep.sawtooth.clear();
    rep.sawtooth.reserve(proc.drops().size());
    for (const auto& d : proc.drops())
        rep.sawtooth.push_back(SawPoint{(d.at - Instant::origin()).seconds(),
                                        d.before.seconds(), d.after.seconds()});
}

// ---- estimation experiment ----

struct EstimationRun {
    EstimationResult result;
    DeliveryTrace trace;
    std::uint64_t ticks{0};
};

inline EstimationRun run_estimation(const EstimationConfig& cfg, std::uint64_t seed,
                                    Span horizon) {
    cfg.source.validate();
    cfg.process.validate();
    validate(cfg.channel);
    const Instant end = Instant::origin() + horizon;

    RngStream src_rng(seed, "est/source");
    RngStream ch_rng(seed, "est/channel");
    RngStream proc_rng(seed, "est/process");

    std::vector<Instant> gens =
        generation_instants(cfg.source, Instant::origin(), end, src_rng);

    // One chronological pass over the merged tick grid and sample instants,
    // evolving the process exactly between consecutive stops.
    EstimationRun run;
    run.trace.window_end = end;
    ProcessModel proc = cfg.process;
    Instant proc_at = Instant::origin();
    std::vector<PathPoint> path;
    const std::uint64_t n_ticks =
        static_cast<std::uint64_t>(horizon.ns / cfg.tick.ns) + 1;
    path.reserve(n_ticks);

    std::size_t gi = 0;
    std::uint64_t k = 0;
    std::vector<std::vector<double>> anchor_values(gens.size());
    while (true) {
        Instant tick_t = Instant::origin() + Span{static_cast<std::int64_t>(
                                                 k * static_cast<std::uint64_t>(cfg.tick.ns))};
        bool tick_ok = k < n_ticks && tick_t <= end;
        bool gen_ok = gi < gens.size();
        if (!tick_ok && !gen_ok) break;
        bool take_gen = gen_ok && (!tick_ok || gens[gi] < tick_t);
        Instant t = take_gen ? gens[gi] : tick_t;
        if (t > proc_at) {
            proc.evolve(t - proc_at, proc_rng);
            proc_at = t;
        }
        if (take_gen) {
            anchor_values[gi] = proc.state;
            ++gi;
        } else {
            path.push_back(PathPoint{t, proc.state});
            ++k;
        }
    }
    run.ticks = path.size();

    for (std::size_t i = 0; i < gens.size(); ++i) {
        DeliveryRecord rec;
        rec.seq = i;
        rec.generated_at = gens[i];
        rec.sample = anchor_values[i];
        Instant t = gens[i];
        rec.fate = PacketFate::in_flight;
        while (t <= end) {
            Attempt a = sample_attempt(cfg.channel, cfg.source.size_bits, ch_rng);
            t += a.duration;
            if (a.success) {
                if (t <= end) {
                    rec.delivered_at = t;
                    rec.fate = PacketFate::delivered;
                }
                break;
            }
            if (!cfg.retransmit) {
                rec.fate = PacketFate::dropped_channel;
                break;
            }
        }
        run.trace.records.push_back(std::move(rec));
    }

    run.result = estimation_error(path, run.trace, cfg.age_bin, cfg.age_bins);
    return run;
}

// ---- per-kind report builders ----

inline void report_one_way(const Scenario& sc, const RunOptions& opt, RunReport& rep) {
    TraceLog tl;
    DeliveryTrace tr =
        run_one_way(sc.one_way, sc.seed, sc.horizon, opt.want_trace ? &tl : nullptr);
    if (opt.want_trace) rep.trace = tl.rows();

    Conservation c = tr.conservation();
    rep.conservation = c;

    std::optional<AoIProcess> aoi_proc;
    auto aoi = [&]() -> const AoIProcess& {
        if (!aoi_proc) {
            aoi_proc = AoIProcess::from_trace(tr);
            fill_sawtooth(rep, *aoi_proc);
        }
        return *aoi_proc;
    };

    for (const MetricRequest& m : sc.metrics) {
        switch (m.kind) {
            case MetricRequest::Kind::latency: {
                SampleSummary s;
                for (const auto& rec : tr.records)
                    if (rec.delivered_at)
                        s.add((*rec.delivered_at - rec.generated_at).seconds());
                rep.rows.push_back(MetricRow::from_summary("latency_s", s));
                break;
            }
            case MetricRequest::Kind::aoi: {
                const AoIProcess& p = aoi();
                rep.rows.push_back(MetricRow::from_scalar(
                    "aoi_mean_s", p.mean_seconds(), p.drops().size()));
                break;
            }
            case MetricRequest::Kind::paoi: {
                rep.rows.push_back(MetricRow::from_summary(
                    "peak_aoi_s", summarize_spans(aoi().peaks())));
                break;
            }
            case MetricRequest::Kind::qaoi: {
                RngStream qrng(sc.seed, "queries");
                rep.rows.push_back(MetricRow::from_summary(
                    "query_aoi_s", query_aoi(aoi(), m.query, qrng)));
                break;
            }
            case MetricRequest::Kind::aoii: {
                AoiiResult r = aoii(tr.state_trail, tr);
                std::uint64_t n = c.delivered;
                rep.rows.push_back(
                    MetricRow::from_scalar("aoii_mean_s", r.time_avg_s, n));
                rep.rows.push_back(MetricRow::from_scalar("aoii_max_s", r.max_s, n));
                break;
            }
            case MetricRequest::Kind::deadline: {
                DeadlineMetrics d = deadline_metrics(tr, m.deadline, m.earliness);
                rep.rows.push_back(MetricRow::from_scalar("deadline_violation_prob",
                                                          d.violation_prob, d.generated));
                rep.rows.push_back(MetricRow::from_scalar(
                    "timely_throughput_bits_per_s", d.timely_throughput_bits_per_s,
                    d.within_deadline));
                rep.rows.push_back(MetricRow::from_scalar("on_time_fraction",
                                                          d.on_time_fraction, d.on_time));
                break;
            }
        }
    }

    rep.extra["packets"] = {{"generated", c.generated},
                            {"delivered", c.delivered},
                            {"dropped_capacity", c.dropped_capacity},
                            {"dropped_channel", c.dropped_channel},
                            {"purged", c.purged},
                            {"preempted", c.preempted},
                            {"in_flight", c.in_flight}};
}

inline void report_two_way(const Scenario& sc, RunReport& rep) {
    RoundTrace rt = run_two_way(sc.two_way, sc.seed, sc.two_way_transfers);
    SampleSummary transfer, rounds, tries;
    for (const auto& rec : rt.records) {
        transfer.add((rec.completed_at - rec.anchor).seconds());
        rounds.add(static_cast<double>(rec.rounds));
        tries.add(static_cast<double>(rec.request_tries));
    }
    rep.rows.push_back(MetricRow::from_summary("transfer_time_s", transfer));
    rep.rows.push_back(MetricRow::from_summary("rounds_per_transfer", rounds));
    if (sc.two_way.mode == TwoWayMode::pull)
        rep.rows.push_back(MetricRow::from_summary("request_tries", tries));
    rep.rows.push_back(MetricRow::from_scalar("t_rtt_s", rt.t_rtt.seconds(), 1));
    rep.rows.push_back(
        MetricRow::from_scalar("rate_data_bits_per_use", rt.rate_data, 1));
    rep.rows.push_back(MetricRow::from_scalar("rate_ack_bits_per_use", rt.rate_ack, 1));
    rep.extra["transfers"] = rt.records.size();
}

inline void report_loop(const Scenario& sc, RunReport& rep) {
    LoopTrace lt = run_loop(sc.loop, sc.seed, sc.horizon);
    LoopAge la = loop_age(lt);
    rep.rows.push_back(MetricRow::from_summary("loop_closure_s", la.closed));
    rep.rows.push_back(MetricRow::from_scalar("open_loops",
                                              static_cast<double>(la.open), la.open));
    rep.rows.push_back(MetricRow::from_scalar(
        "cycles", static_cast<double>(lt.records.size()), lt.records.size()));
    rep.extra["cycles"] = lt.records.size();
    rep.extra["open_loops"] = la.open;
}

inline void report_estimation(const Scenario& sc, RunReport& rep) {
    EstimationRun run = run_estimation(sc.estimation, sc.seed, sc.horizon);
    Conservation c = run.trace.conservation();
    rep.conservation = c;
    rep.rows.push_back(MetricRow::from_scalar("time_avg_sq_error",
                                              run.result.time_avg_g, run.result.samples));
    rep.rows.push_back(MetricRow::from_scalar(
        "deliveries", static_cast<double>(c.delivered), c.delivered));
    njson curve = njson::array();
    for (const AgeBin& b : run.result.curve)
        curve.push_back({{"age_mid_s", b.age_mid_s},
                         {"mean_sq_error", b.mean_g},
                         {"count", b.count}});
    rep.extra["sq_error_vs_age"] = curve;
    rep.extra["path_points"] = run.ticks;
}

inline void report_pipeline(const Scenario& sc, RunReport& rep) {
    const PipelineScenario& p = sc.pipeline;
    RngStream rng(sc.seed, "pipeline");

    SampleSummary total;
    std::vector<SampleSummary> per_stage;
    std::vector<std::string> stage_names;
    std::uint64_t fired = 0;

    for (std::uint64_t r = 0; r < p.runs; ++r) {
        CascadeResult res;
        switch (p.variant) {
            case PipelineScenario::Variant::independent:
                res = compose_independent(p.stages, p.input_bits, rng);
                break;
            case PipelineScenario::Variant::coupled:
                res = compose_coupled(p.stages, p.coupling, p.input_bits, rng);
                break;
            case PipelineScenario::Variant::merged:
                res = compose_merged(p.stages, p.merge_at, p.merged, p.input_bits, rng);
                break;
        }
        if (per_stage.empty()) {
            per_stage.resize(res.stages.size());
            for (const auto& s : res.stages) stage_names.push_back(s.name);
        }
        total.add(res.total.seconds());
        for (std::size_t i = 0; i < res.stages.size(); ++i)
            per_stage[i].add(res.stages[i].span.seconds());
        if (res.coupling_fired) ++fired;
    }

    rep.rows.push_back(MetricRow::from_summary("total_latency_s", total));
    for (std::size_t i = 0; i < per_stage.size(); ++i)
        rep.rows.push_back(
            MetricRow::from_summary("stage[" + stage_names[i] + "]_s", per_stage[i]));

    if (p.variant == PipelineScenario::Variant::coupled) {
        rep.rows.push_back(MetricRow::from_scalar(
            "coupling_fired_fraction",
            p.runs ? static_cast<double>(fired) / static_cast<double>(p.runs) : 0.0,
            fired));
    }
    if (p.variant == PipelineScenario::Variant::independent && p.stages.size() >= 2) {
        RngStream crng(sc.seed, "pipeline/corr");
        std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(p.runs, 20000));
        if (n < 2) n = 2;
        double corr = stage_span_correlation(p.stages, 0, p.stages.size() - 1, n, crng,
                                             p.input_bits);
        rep.rows.push_back(MetricRow::from_scalar("span_correlation_first_last", corr, n));
    }
    if (p.variant == PipelineScenario::Variant::merged) {
        std::uint64_t bits = p.input_bits;
        for (std::size_t i = 0; i < p.merge_at; ++i) bits = p.stages[i].output_bits(bits);
        const std::uint64_t mid = p.stages[p.merge_at].output_bits(bits);
        double margin = p.stages[p.merge_at].min_span_s(bits) +
                        p.stages[p.merge_at + 1].min_span_s(mid) -
                        p.merged.max_span_s(bits);
        rep.rows.push_back(MetricRow::from_scalar("dominance_margin_s", margin, 1));
    }
    rep.extra["runs"] = p.runs;
}

inline void report_consensus(const Scenario& sc, RunReport& rep) {
    const ConsensusScenario& cs = sc.consensus;
    SampleSummary birdseye, initiator, full;
    std::uint64_t converged = 0, informed_all = 0;
    double opinion_sum = 0.0;
    for (std::uint64_t r = 0; r < cs.runs; ++r) {
        ConsensusVerdict v = run_consensus(cs.cfg, sc.seed, r);
        if (v.birdseye_round) {
            ++converged;
            birdseye.add(static_cast<double>(*v.birdseye_round));
            opinion_sum += static_cast<double>(*v.opinion);
        }
        if (v.initiator_round) initiator.add(static_cast<double>(*v.initiator_round));
        if (v.full_round) {
            ++informed_all;
            full.add(static_cast<double>(*v.full_round));
        }
    }
    double runs_d = static_cast<double>(cs.runs);
    rep.rows.push_back(MetricRow::from_scalar(
        "convergence_fraction", cs.runs ? converged / runs_d : 0.0, converged));
    rep.rows.push_back(MetricRow::from_summary("birdseye_round", birdseye));
    rep.rows.push_back(MetricRow::from_summary("initiator_informed_round", initiator));
    rep.rows.push_back(MetricRow::from_summary("network_informed_round", full));
    if (converged)
        rep.rows.push_back(MetricRow::from_scalar(
            "mean_agreed_opinion", opinion_sum / static_cast<double>(converged),
            converged));
    rep.extra["runs"] = cs.runs;
    rep.extra["converged"] = converged;
    rep.extra["network_informed"] = informed_all;
}

inline void report_fedsim(const Scenario& sc, RunReport& rep) {
    const FedScenario& f = sc.fed;
    switch (f.mode) {
        case FedScenario::Mode::train: {
            TrainResult r = train_quadratic(f.task, f.devices, f.policy, sc.seed,
                                            f.rounds, false);
            SampleSummary lat, parts;
            for (Span s : r.round_latency_trace) lat.add(s.seconds());
            for (std::uint32_t p : r.participants_trace)
                parts.add(static_cast<double>(p));
            rep.rows.push_back(MetricRow::from_scalar(
                "final_grad_norm",
                r.grad_norm_trace.empty() ? 0.0 : r.grad_norm_trace.back(),
                r.grad_norm_trace.size()));
            rep.rows.push_back(MetricRow::from_summary("round_latency_s", lat));
            rep.rows.push_back(MetricRow::from_scalar(
                "learning_latency_s", r.learning_latency.seconds(), f.rounds));
            rep.rows.push_back(MetricRow::from_summary("participants_per_round", parts));
            if (r.converged_after)
                rep.rows.push_back(MetricRow::from_scalar(
                    "converged_after_rounds", static_cast<double>(*r.converged_after),
                    1));
            rep.extra["grad_norm_trace"] = r.grad_norm_trace;
            rep.extra["participants_trace"] = r.participants_trace;
            break;
        }
        case FedScenario::Mode::reliability: {
            ReliabilityCurve c = round_reliability(f.task, f.devices, f.policy, sc.seed,
                                                   f.round_grid, f.trials, f.target_prob);
            njson curve = njson::array();
            for (const auto& pt : c.points) {
                rep.rows.push_back(MetricRow::from_scalar(
                    "f_c[N=" + std::to_string(pt.n_rounds) + "]", pt.f_c, c.trials));
                curve.push_back({{"n_rounds", pt.n_rounds}, {"f_c", pt.f_c}});
            }
            if (c.n_star)
                rep.rows.push_back(MetricRow::from_scalar(
                    "n_star", static_cast<double>(*c.n_star), c.trials));
            rep.extra["reliability_curve"] = curve;
            rep.extra["trials"] = c.trials;
            break;
        }
        case FedScenario::Mode::rate_check: {
            std::vector<RatePoint> pts;
            njson curve = njson::array();
            for (std::uint64_t n : f.round_grid)
                pts.push_back(run_rate_point(f.task, f.devices, f.policy, sc.seed, n,
                                             f.trials, f.c3));
            RateCheck rc = convergence_rate_check(pts);
            for (const auto& pt : pts) {
                double m = 0.0;
                for (double v : pt.avg_grad_norm) m += v;
                m /= static_cast<double>(pt.avg_grad_norm.size());
                rep.rows.push_back(MetricRow::from_scalar(
                    "mean_grad_norm[N=" + std::to_string(pt.n_rounds) + "]", m,
                    pt.avg_grad_norm.size()));
                curve.push_back({{"n_rounds", pt.n_rounds}, {"mean_grad_norm", m}});
            }
            rep.rows.push_back(MetricRow::from_scalar("rate_slope", rc.slope, pts.size()));
            rep.rows.push_back(MetricRow::from_scalar("rate_envelope_c", rc.c_envelope, 1));
            rep.rows.push_back(
                MetricRow::from_scalar("rate_consistent", rc.consistent ? 1.0 : 0.0, 1));
            rep.extra["rate_curve"] = curve;
            break;
        }
    }
}

inline void fig1_rows(const Fig1ModeResult& r, RunReport& rep) {
    const std::string& p = r.scheme;
    rep.rows.push_back(MetricRow::from_scalar(p + ".goodput", r.highrate_goodput, 1));
    rep.rows.push_back(MetricRow::from_scalar(
        p + ".updates_delivered", static_cast<double>(r.updates_delivered),
        r.updates_delivered));
    rep.rows.push_back(MetricRow::from_scalar(
        p + ".updates_supplanted", static_cast<double>(r.updates_supplanted),
        r.updates_supplanted));
    rep.rows.push_back(MetricRow::from_scalar(p + ".worst_latency_slots",
                                              r.worst_latency_slots, r.updates_delivered));
    rep.rows.push_back(MetricRow::from_scalar(p + ".mean_latency_slots",
                                              r.mean_latency_slots, r.updates_delivered));
    rep.rows.push_back(MetricRow::from_scalar(p + ".qaoi_mean_slots", r.qaoi_mean_slots,
                                              r.qaoi_samples));
}

inline void report_fig1(const Scenario& sc, RunReport& rep) {
    std::optional<Fig1ModeResult> res, pull;
    if (sc.fig1_scheme != "pull") res = run_fig1_reservation(sc.fig1, sc.seed);
    if (sc.fig1_scheme != "reservation") pull = run_fig1_pull(sc.fig1, sc.seed);
    if (res) fig1_rows(*res, rep);
    if (pull) fig1_rows(*pull, rep);
    if (res && pull) {
        rep.rows.push_back(MetricRow::from_scalar(
            "goodput_gain_pull_minus_reservation",
            pull->highrate_goodput - res->highrate_goodput, 1));
        rep.extra["comparison"] = {
            {"reservation_qaoi_mean_slots", res->qaoi_mean_slots},
            {"pull_qaoi_mean_slots", pull->qaoi_mean_slots},
            {"reservation_goodput", res->highrate_goodput},
            {"pull_goodput", pull->highrate_goodput}};
    }
}

}  // namespace detail

inline RunReport run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
    RunReport rep;
    rep.scenario_name = sc.name;
    rep.seed = sc.seed;
    rep.horizon_s = sc.horizon.seconds();
    switch (sc.kind) {
        case Scenario::Kind::one_way: detail::report_one_way(sc, opt, rep); break;
        case Scenario::Kind::two_way: detail::report_two_way(sc, rep); break;
        case Scenario::Kind::loop: detail::report_loop(sc, rep); break;
        case Scenario::Kind::estimation: detail::report_estimation(sc, rep); break;
        case Scenario::Kind::pipeline: detail::report_pipeline(sc, rep); break;
        case Scenario::Kind::consensus: detail::report_consensus(sc, rep); break;
        case Scenario::Kind::fedsim: detail::report_fedsim(sc, rep); break;
        case Scenario::Kind::fig1: detail::report_fig1(sc, rep); break;
    }
    return rep;
}

}  // namespace tempo
