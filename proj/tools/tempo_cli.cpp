#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tempo/tempo.hpp>

namespace {

namespace fs = std::filesystem;

tempo::Scenario resolve_scenario(const std::string& ref) {
    if (fs::exists(ref)) return tempo::load_scenario_file(ref);
    if (const char* text = tempo::find_builtin(ref)) return tempo::load_scenario_text(text);
    throw tempo::ValidationError("unknown scenario '" + ref +
                                 "': not a file and not a builtin name");
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
    std::vector<std::uint64_t> seeds;
    auto parse_one = [](const std::string& tok) {
        std::size_t used = 0;
        std::uint64_t v = std::stoull(tok, &used);
        if (used != tok.size()) throw tempo::ValidationError("bad seed '" + tok + "'");
        return v;
    };
    auto range = spec.find("..");
    try {
        if (range != std::string::npos) {
            std::uint64_t lo = parse_one(spec.substr(0, range));
            std::uint64_t hi = parse_one(spec.substr(range + 2));
            if (hi < lo) throw tempo::ValidationError("seed range is backwards");
            if (hi - lo > 100000) throw tempo::ValidationError("seed range too large");
            for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        } else {
            std::size_t pos = 0;
            while (pos <= spec.size()) {
                std::size_t comma = spec.find(',', pos);
                if (comma == std::string::npos) comma = spec.size();
                seeds.push_back(parse_one(spec.substr(pos, comma - pos)));
                pos = comma + 1;
            }
        }
    } catch (const std::invalid_argument&) {
        throw tempo::ValidationError("seeds must look like 1..8 or 1,4,9");
    } catch (const std::out_of_range&) {
        throw tempo::ValidationError("seed out of range");
    }
    return seeds;
}

void print_table(const tempo::RunReport& rep) {
    std::printf("scenario %s  seed %llu  horizon %.9gs\n", rep.scenario_name.c_str(),
                static_cast<unsigned long long>(rep.seed), rep.horizon_s);
    std::printf("%-36s %10s %12s %12s %12s %12s %12s\n", "metric", "count", "mean", "p50",
                "p95", "p99", "max");
    for (const tempo::MetricRow& r : rep.rows)
        std::printf("%-36s %10llu %12.6g %12.6g %12.6g %12.6g %12.6g\n", r.name.c_str(),
                    static_cast<unsigned long long>(r.stats.count), r.stats.mean,
                    r.stats.p50, r.stats.p95, r.stats.p99, r.stats.max);
    if (rep.conservation) {
        const tempo::Conservation& c = *rep.conservation;
        std::printf(
            "packets: generated %llu  delivered %llu  dropped %llu+%llu  purged %llu  "
            "preempted %llu  in flight %llu  (%s)\n",
            static_cast<unsigned long long>(c.generated),
            static_cast<unsigned long long>(c.delivered),
            static_cast<unsigned long long>(c.dropped_capacity),
            static_cast<unsigned long long>(c.dropped_channel),
            static_cast<unsigned long long>(c.purged),
            static_cast<unsigned long long>(c.preempted),
            static_cast<unsigned long long>(c.in_flight),
            c.reconciles() ? "reconciles" : "LEAK");
    }
}

std::string default_output_dir() {
    if (const char* env = std::getenv("TEMPO_OUTPUT_DIR")) return env;
    return ".";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tempo: deterministic timing simulation and metrics"};
    app.require_subcommand(1);

    std::string scenario_ref, seeds_spec = "1..8", output = default_output_dir();
    std::string format = "csv";
    double horizon_override = -1.0;
    std::int64_t seed_override = -1;
    bool want_trace = false, want_sawtooth = false, want_effective = false;

    CLI::App* run = app.add_subcommand("run", "run one scenario and write a report");
    run->add_option("scenario", scenario_ref, "scenario file or builtin name")->required();
    run->add_option("--seed", seed_override, "override the scenario seed");
    run->add_option("--horizon", horizon_override, "override the horizon in seconds");
    run->add_option("--output", output, "output directory");
    run->add_option("--format", format, "report format: csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));
    run->add_flag("--trace", want_trace, "also write the event trace");
    run->add_flag("--sawtooth", want_sawtooth, "also write age sawtooth breakpoints");
    run->add_flag("--effective-config", want_effective,
                  "also write the fully defaulted scenario");

    CLI::App* sw = app.add_subcommand("sweep", "run one scenario across several seeds");
    sw->add_option("scenario", scenario_ref, "scenario file or builtin name")->required();
    sw->add_option("--seeds", seeds_spec, "seed list: 1..8 or 1,4,9");
    sw->add_option("--horizon", horizon_override, "override the horizon in seconds");
    sw->add_option("--output", output, "output directory");
    sw->add_option("--format", format, "report format: csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));

    CLI::App* ls = app.add_subcommand("list-scenarios", "print the builtin scenarios");
    CLI::App* ex = app.add_subcommand("explain", "print a builtin scenario's JSON");
    ex->add_option("scenario", scenario_ref, "builtin name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ls->parsed()) {
            for (const tempo::BuiltinScenario& b : tempo::builtin_scenarios()) {
                tempo::Scenario sc = tempo::load_scenario_text(b.text);
                std::printf("%-28s %s\n", b.name, sc.description.c_str());
            }
            return 0;
        }
        if (ex->parsed()) {
            const char* text = tempo::find_builtin(scenario_ref);
            if (!text)
                throw tempo::ValidationError("unknown builtin '" + scenario_ref + "'");
            std::fputs(text, stdout);
            return 0;
        }

        tempo::Scenario sc = resolve_scenario(scenario_ref);
        if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
        if (horizon_override > 0.0)
            sc.horizon = tempo::Span::from_seconds(horizon_override);

        fs::create_directories(output);
        auto out_path = [&](const std::string& suffix) {
            return (fs::path(output) / (sc.name + suffix)).string();
        };

        if (run->parsed()) {
            tempo::RunOptions opt;
            opt.want_trace = want_trace;
            auto t0 = std::chrono::steady_clock::now();
            tempo::RunReport rep = tempo::run_scenario(sc, opt);
            auto t1 = std::chrono::steady_clock::now();

            print_table(rep);
            if (format == "csv" || format == "both")
                tempo::write_text_file(out_path(".report.csv"), tempo::report_csv(rep));
            if (format == "json" || format == "both")
                tempo::write_text_file(out_path(".report.json"),
                                       tempo::report_json_text(rep));
            if (want_trace)
                tempo::write_text_file(out_path(".trace.csv"), tempo::trace_csv(rep.trace));
            if (want_sawtooth)
                tempo::write_text_file(out_path(".sawtooth.csv"),
                                       tempo::sawtooth_csv(rep.sawtooth));
            if (want_effective)
                tempo::write_text_file(out_path(".effective.json"),
                                       tempo::effective_config_text(sc));
            double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            std::printf("completed in %.1f ms\n", ms);
            return 0;
        }

        if (sw->parsed()) {
            std::vector<std::uint64_t> seeds = parse_seeds(seeds_spec);
            auto t0 = std::chrono::steady_clock::now();
            tempo::SweepResult res = tempo::sweep(sc, seeds);
            auto t1 = std::chrono::steady_clock::now();

            std::printf("scenario %s  %zu seeds\n", sc.name.c_str(), res.seeds.size());
            std::printf("%-36s %12s %12s %12s %12s\n", "metric", "mean", "std_error",
                        "min", "max");
            for (const tempo::SweepRow& r : res.rows)
                std::printf("%-36s %12.6g %12.6g %12.6g %12.6g\n", r.name.c_str(), r.mean,
                            r.std_error, r.min, r.max);
            if (format == "csv" || format == "both")
                tempo::write_text_file(out_path(".sweep.csv"), tempo::sweep_csv(res));
            if (format == "json" || format == "both")
                tempo::write_text_file(out_path(".sweep.json"),
                                       tempo::sweep_json(res).dump(2) + "\n");
            double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            std::printf("completed in %.1f ms\n", ms);
            return 0;
        }
    } catch (const tempo::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const tempo::ValidationError& e) {
        std::fprintf(stderr, "invalid scenario: %s\n", e.what());
        return 3;
    } catch (const tempo::DuplicateSeeds& e) {
        std::fprintf(stderr, "invalid sweep: %s\n", e.what());
        return 3;
    } catch (const tempo::Error& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
