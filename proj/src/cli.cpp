#include "breakwatch/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "breakwatch/dataio.hpp"
#include "breakwatch/engine.hpp"
#include "breakwatch/error.hpp"
#include "breakwatch/mosum.hpp"
#include "breakwatch/synth.hpp"

namespace breakwatch::cli {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct Options {
    int threads = 0;

    synth::SynthSpec synth;
    std::string out;

    std::string input;
    engine::MonitorConfig monitor;
    std::optional<double> lambda;
    std::string backend = "fused";
    bool profile = false;

    mosum::CriticalValueRequest critical;

    std::vector<std::size_t> m_list;
    std::size_t bench_observations = 200;
};

void add_model_flags(CLI::App* cmd, engine::MonitorConfig& config) {
    cmd->add_option("--n", config.history, "History length n")->capture_default_str();
    cmd->add_option("--h", config.bandwidth, "MOSUM bandwidth h")->capture_default_str();
    cmd->add_option("--k", config.harmonics, "Harmonic terms k")->capture_default_str();
    cmd->add_option("--freq", config.frequency, "Observations per season cycle f")
        ->capture_default_str();
    cmd->add_option("--alpha", config.alpha, "Significance level")->capture_default_str();
    cmd->add_option("--block", config.block_pixels, "Pixels per work block")
        ->capture_default_str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    return out;
}

void print_timings(const engine::PhaseTimings& t, std::ostream& out) {
    out << "phase ingest " << format_double(t.ingest) << " s\n"
        << "phase model " << format_double(t.model) << " s\n"
        << "phase predictions " << format_double(t.predictions) << " s\n"
        << "phase residuals " << format_double(t.residuals) << " s\n"
        << "phase mosum " << format_double(t.mosum) << " s\n"
        << "phase breaks " << format_double(t.breaks) << " s\n"
        << "total " << format_double(t.total) << " s\n";
}

int run_generate(Options& opt, std::ostream& out) {
    opt.synth.threads = opt.threads;
    const auto result = synth::generate(opt.synth);
    dataio::save_stack(result.stack, opt.out);
    out << "wrote " << opt.synth.pixels << " series of length " << opt.synth.observations << " ("
        << synth::break_pixels(opt.synth) << " with breaks) to " << opt.out << '\n';
    return kSuccess;
}

int run_monitor(Options& opt, std::ostream& out) {
    auto& config = opt.monitor;
    config.lambda = opt.lambda;
    config.backend = opt.backend == "naive" ? engine::Backend::naive : engine::Backend::fused;
    config.threads = opt.threads;

    const auto stack = dataio::load_stack(opt.input);
    engine::validate(config, stack.observations());

    auto [map, timings] = engine::profile_run(stack, config);
    auto sink = open_output(opt.out);
    dataio::write_break_map(map, sink);
    sink.close();
    if (!sink) {
        throw IoError("failed to write " + opt.out);
    }

    const auto valid = static_cast<std::size_t>(std::count(map.valid.begin(), map.valid.end(), 1));
    out << "lambda: " << format_double(map.lambda) << '\n'
        << "breaks: " << map.break_count() << " of " << valid << " valid pixels (" << map.pixels()
        << " total)\n";
    if (opt.profile) {
        print_timings(timings, out);
    }
    return kSuccess;
}

int run_critical_value(Options& opt, std::ostream& out) {
    opt.critical.threads = opt.threads;
    out << format_double(mosum::critical_value(opt.critical)) << '\n';
    return kSuccess;
}

int run_bench(Options& opt, std::ostream& out) {
    auto& config = opt.monitor;
    config.threads = opt.threads;
    config.lambda = opt.lambda;
    engine::validate(config, opt.bench_observations);

    synth::SynthSpec spec;
    spec.observations = opt.bench_observations;
    spec.frequency = config.frequency;
    spec.seed = opt.synth.seed;
    spec.threads = opt.threads;

    const auto rows = synth::bench_scaling(opt.m_list, config, spec);
    auto sink = open_output(opt.out);
    synth::write_scaling_csv(rows, sink);
    synth::write_scaling_csv(rows, out);
    return kSuccess;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Batch MOSUM break detection for pixel time series", "breakwatch"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
        ->envname("BREAKWATCH_THREADS")
        ->check(CLI::NonNegativeNumber);

    auto* generate = app.add_subcommand("generate", "Write a synthetic stack");
    generate->add_option("--m", opt.synth.pixels, "Number of series")->capture_default_str();
    generate->add_option("--N", opt.synth.observations, "Series length")->capture_default_str();
    generate->add_option("--freq", opt.synth.frequency, "Season length")->capture_default_str();
    generate->add_option("--noise-std", opt.synth.noise_std, "Noise std")->capture_default_str();
    generate->add_option("--break-mag", opt.synth.break_mag, "Break constant c")
        ->capture_default_str();
    generate->add_option("--break-frac", opt.synth.break_frac, "Tail fraction with the break")
        ->capture_default_str();
    generate->add_option("--break-ratio", opt.synth.break_ratio, "Fraction of series with a break")
        ->capture_default_str();
    generate->add_option("--seed", opt.synth.seed, "Random seed")->capture_default_str();
    generate->add_option("--out", opt.out, "Output BTS1 file")->required();

    auto* monitor = app.add_subcommand("monitor", "Detect breaks in a stack");
    monitor->add_option("--input", opt.input, "Input BTS1 file")->required();
    add_model_flags(monitor, opt.monitor);
    monitor->add_option("--lambda", opt.lambda, "Explicit critical value")
        ->check(CLI::PositiveNumber);
    monitor->add_option("--backend", opt.backend, "fused or naive")
        ->check(CLI::IsMember({"fused", "naive"}))
        ->capture_default_str();
    monitor->add_flag("--profile", opt.profile, "Print phase timings");
    monitor->add_option("--out", opt.out, "Output break-map CSV")->required();

    auto* critical = app.add_subcommand("critical-value", "Simulate the critical value lambda");
    critical->add_option("--alpha", opt.critical.alpha)->capture_default_str();
    critical->add_option("--h-frac", opt.critical.h_frac)->capture_default_str();
    critical->add_option("--horizon", opt.critical.horizon)->capture_default_str();
    critical->add_option("--n-sim", opt.critical.n_sim)->capture_default_str();
    critical->add_option("--reps", opt.critical.reps)->capture_default_str();
    critical->add_option("--seed", opt.critical.seed)->capture_default_str();
    critical->add_option("--k", opt.critical.harmonics)->capture_default_str();
    critical->add_option("--freq", opt.critical.frequency)->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Profile the fused backend over pixel counts");
    bench->add_option("--m-list", opt.m_list, "Comma-separated pixel counts")
        ->delimiter(',')
        ->required();
    add_model_flags(bench, opt.monitor);
    bench->add_option("--N", opt.bench_observations, "Series length")->capture_default_str();
    bench->add_option("--lambda", opt.lambda, "Explicit critical value")
        ->check(CLI::PositiveNumber);
    bench->add_option("--seed", opt.synth.seed, "Random seed")->capture_default_str();
    bench->add_option("--out", opt.out, "Output timing CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (generate->parsed()) {
            return run_generate(opt, out);
        }
        if (monitor->parsed()) {
            return run_monitor(opt, out);
        }
        if (critical->parsed()) {
            return run_critical_value(opt, out);
        }
        return run_bench(opt, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
}

}  // namespace breakwatch::cli
