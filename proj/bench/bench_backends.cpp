// Fused vs naive backend timings over growing pixel counts.
//
//   bench_backends [--m 10000,50000,100000] [--N 200] [--repeats 3] [--threads 0]

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <vector>

#include "breakwatch/engine.hpp"
#include "breakwatch/synth.hpp"

using namespace breakwatch;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> sizes{10000, 50000, 100000};
    std::size_t observations = 200;
    int repeats = 3;
    int threads = 0;
    bool skip_naive = false;

    CLI::App app{"Compare the fused and naive monitoring backends"};
    app.add_option("--m", sizes, "Pixel counts")->delimiter(',');
    app.add_option("--N", observations, "Series length");
    app.add_option("--repeats", repeats, "Runs per point (median reported)");
    app.add_option("--threads", threads, "Worker threads");
    app.add_flag("--skip-naive", skip_naive, "Time the fused backend only");
    CLI11_PARSE(app, argc, argv);

    engine::MonitorConfig config;
    config.threads = threads;
    config.lambda = engine::resolve_lambda(config, observations);

    std::printf("%10s %12s %12s %10s\n", "m", "fused[s]", "naive[s]", "speedup");
    for (std::size_t m : sizes) {
        synth::SynthSpec spec;
        spec.pixels = m;
        spec.observations = observations;
        spec.threads = threads;
        const auto data = synth::generate(spec);

        std::vector<double> fused, naive;
        for (int r = 0; r < repeats; ++r) {
            config.backend = engine::Backend::fused;
            fused.push_back(engine::profile_run(data.stack, config).second.total);
            if (!skip_naive) {
                config.backend = engine::Backend::naive;
                naive.push_back(engine::profile_run(data.stack, config).second.total);
            }
        }
        const double f = median(fused);
        if (skip_naive) {
            std::printf("%10zu %12.4f %12s %10s\n", m, f, "-", "-");
        } else {
            const double n = median(naive);
            std::printf("%10zu %12.4f %12.4f %9.1fx\n", m, f, n, n / f);
        }
    }
    return 0;
}
