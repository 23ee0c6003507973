#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tempo/runner.hpp"

namespace tempo {

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

inline std::string report_csv(const RunReport& rep) {
    std::string out = "metric,count,mean,p50,p95,p99,max\n";
    for (const MetricRow& r : rep.rows) {
        out += r.name;
        out += ',' + std::to_string(r.stats.count);
        out += ',' + detail::fmt_g(r.stats.mean);
        out += ',' + detail::fmt_g(r.stats.p50);
        out += ',' + detail::fmt_g(r.stats.p95);
        out += ',' + detail::fmt_g(r.stats.p99);
        out += ',' + detail::fmt_g(r.stats.max);
        out += '\n';
    }
    return out;
}

inline njson report_json(const RunReport& rep) {
    njson root;
    root["scenario"] = rep.scenario_name;
    root["seed"] = rep.seed;
    root["horizon_s"] = rep.horizon_s;
    njson rows = njson::array();
    for (const MetricRow& r : rep.rows) {
        njson row;
        row["metric"] = r.name;
        row["count"] = r.stats.count;
        row["mean"] = r.stats.mean;
        row["p50"] = r.stats.p50;
        row["p95"] = r.stats.p95;
        row["p99"] = r.stats.p99;
        row["max"] = r.stats.max;
        if (r.scalar) row["scalar"] = true;
        rows.push_back(row);
    }
    root["rows"] = rows;
    if (rep.conservation) {
        const Conservation& c = *rep.conservation;
        root["conservation"] = {{"generated", c.generated},
                                {"delivered", c.delivered},
                                {"dropped_capacity", c.dropped_capacity},
                                {"dropped_channel", c.dropped_channel},
                                {"purged", c.purged},
                                {"preempted", c.preempted},
                                {"in_flight", c.in_flight},
                                {"reconciles", c.reconciles()}};
    }
    if (!rep.extra.empty()) root["extra"] = rep.extra;
    return root;
}

inline std::string report_json_text(const RunReport& rep) {
    return report_json(rep).dump(2) + "\n";
}

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::string out = "t_ns,entity,event,detail\n";
    for (const TraceRow& r : rows) {
        out += std::to_string(r.t_ns);
        out += ',' + r.entity + ',' + r.event + ',' + r.detail + '\n';
    }
    return out;
}

inline std::string sawtooth_csv(const std::vector<SawPoint>& pts) {
    std::string out = "t_s,age_before_s,age_after_s\n";
    for (const SawPoint& p : pts) {
        out += detail::fmt_g(p.t_s);
        out += ',' + detail::fmt_g(p.before_s);
        out += ',' + detail::fmt_g(p.after_s);
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

// ---- multi-seed sweeps ------------------------------------------------------

struct SweepRow {
    std::string name;
    double mean{0.0};
    double std_error{0.0};
    double min{0.0};
    double max{0.0};
    std::uint64_t seeds{0};
};

struct SweepResult {
    std::vector<std::uint64_t> seeds;
    std::vector<SweepRow> rows;
    std::vector<RunReport> reports;
};

// Runs the scenario once per seed and aggregates the per-seed means. Seeds
// are sorted first, so the merged table does not depend on the order they
// were given in.
inline SweepResult sweep(Scenario sc, std::vector<std::uint64_t> seeds) {
    if (seeds.empty()) throw ValidationError("sweep needs at least one seed");
    std::sort(seeds.begin(), seeds.end());
    for (std::size_t i = 1; i < seeds.size(); ++i)
        if (seeds[i] == seeds[i - 1])
            throw DuplicateSeeds("seed " + std::to_string(seeds[i]) + " repeats");

    SweepResult res;
    res.seeds = seeds;
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> by_name;
    for (std::uint64_t s : seeds) {
        sc.seed = s;
        RunReport rep = run_scenario(sc);
        for (const MetricRow& r : rep.rows) {
            auto it = by_name.find(r.name);
            if (it == by_name.end()) {
                order.push_back(r.name);
                it = by_name.emplace(r.name, std::vector<double>{}).first;
            }
            it->second.push_back(r.stats.mean);
        }
        res.reports.push_back(std::move(rep));
    }

    for (const std::string& name : order) {
        const std::vector<double>& xs = by_name[name];
        SweepRow row;
        row.name = name;
        row.seeds = xs.size();
        row.min = *std::min_element(xs.begin(), xs.end());
        row.max = *std::max_element(xs.begin(), xs.end());
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        row.mean = m;
        if (xs.size() > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - m) * (x - m);
            row.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                                      static_cast<double>(xs.size()));
        }
        res.rows.push_back(row);
    }
    return res;
}

inline std::string sweep_csv(const SweepResult& res) {
    std::string out = "metric,mean,std_error,min,max,seeds\n";
    for (const SweepRow& r : res.rows) {
        out += r.name;
        out += ',' + detail::fmt_g(r.mean);
        out += ',' + detail::fmt_g(r.std_error);
        out += ',' + detail::fmt_g(r.min);
        out += ',' + detail::fmt_g(r.max);
        out += ',' + std::to_string(r.seeds);
        out += '\n';
    }
    return out;
}

inline njson sweep_json(const SweepResult& res) {
    njson root;
    root["seeds"] = res.seeds;
    njson rows = njson::array();
    for (const SweepRow& r : res.rows)
        rows.push_back({{"metric", r.name},
                        {"mean", r.mean},
                        {"std_error", r.std_error},
                        {"min", r.min},
                        {"max", r.max},
                        {"seeds", r.seeds}});
    root["rows"] = rows;
    return root;
}

}  // namespace tempo
