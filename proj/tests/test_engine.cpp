#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "breakwatch/engine.hpp"
#include "breakwatch/error.hpp"
#include "breakwatch/synth.hpp"

using namespace breakwatch;
using namespace breakwatch::engine;

namespace {

MonitorConfig fixed_config(Backend backend = Backend::fused) {
    MonitorConfig c;
    c.lambda = 4.87;
    c.backend = backend;
    return c;
}

SeriesStack synthetic(std::size_t m, std::uint64_t seed, double noise = 0.01, double mag = 0.1) {
    synth::SynthSpec spec;
    spec.pixels = m;
    spec.noise_std = noise;
    spec.break_mag = mag;
    spec.seed = seed;
    return synth::generate(spec).stack;
}

SeriesStack with_pixels(const SeriesStack& src, const std::vector<std::size_t>& order) {
    const std::size_t n_obs = src.observations();
    std::vector<float> data(n_obs * order.size());
    for (std::size_t t = 0; t < n_obs; ++t) {
        for (std::size_t p = 0; p < order.size(); ++p) {
            data[t * order.size() + p] = src.at(t, order[p]);
        }
    }
    return SeriesStack(src.axis(), order.size(), std::move(data));
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("gap filling") {
    const auto filled = fill_gaps(std::vector<float>{NAN, 1.0f, NAN, 3.0f});
    REQUIRE(filled.has_value());
    CHECK(*filled == std::vector<float>{1.0f, 1.0f, 1.0f, 3.0f});
    CHECK_FALSE(fill_gaps(std::vector<float>{NAN, NAN}).has_value());
    const std::vector<float> clean{0.5f, -2.0f, 7.0f};
    CHECK(*fill_gaps(clean) == clean);

    std::vector<float> all_nan{NAN, NAN, NAN};
    CHECK_FALSE(fill_gaps_inplace(all_nan));
    CHECK(std::isnan(all_nan[1]));
    std::vector<float> tail{1.0f, NAN, NAN};
    CHECK(fill_gaps_inplace(tail));
    CHECK(tail == std::vector<float>{1.0f, 1.0f, 1.0f});
}

TEST_CASE("stack construction checks sizes") {
    CHECK_THROWS_AS(SeriesStack(model::TimeAxis::regular(3), 2, std::vector<float>(5)),
                    InvalidArgument);
    CHECK_THROWS_AS(SeriesStack(model::TimeAxis::regular(3), 0, {}), InvalidArgument);
    const SeriesStack s(model::TimeAxis::regular(2), 2, {1, 2, 3, 4});
    CHECK(s.at(1, 0) == 3.0f);
    CHECK(s.series(1) == std::vector<float>{2.0f, 4.0f});
}

TEST_CASE("configuration validation") {
    MonitorConfig c = fixed_config();
    CHECK_NOTHROW(validate(c, 200));
    c.bandwidth = 101;
    CHECK_THROWS_AS(validate(c, 200), InvalidArgument);
    c = fixed_config();
    c.bandwidth = 0;
    CHECK_THROWS_AS(validate(c, 200), InvalidArgument);
    c = fixed_config();
    CHECK_THROWS_AS(validate(c, 100), InvalidArgument);
    c.history = 8;
    c.bandwidth = 4;
    CHECK_THROWS_AS(validate(c, 200), InvalidArgument);
    c = fixed_config();
    c.alpha = 0.0;
    CHECK_THROWS_AS(validate(c, 200), InvalidArgument);
    c = fixed_config();
    c.lambda = -1.0;
    CHECK_THROWS_AS(validate(c, 200), InvalidArgument);
    c = fixed_config();
    c.block_pixels = 0;
    CHECK_THROWS_AS(validate(c, 200), InvalidArgument);
}

TEST_CASE("single pixel equals the per-series composition") {
    const SeriesStack stack = synthetic(1, 4, 0.02, 0.3);
    MonitorConfig c = fixed_config();
    c.keep_mosum = true;
    const BreakMap map = monitor_batch(stack, c);

    const model::DesignMatrix d = model::build_design_matrix(stack.axis(), 23.0, 3);
    std::vector<double> y(200);
    for (std::size_t t = 0; t < 200; ++t) {
        y[t] = stack.at(t, 0);
    }
    const model::HistoryModel fit = model::fit_history(d, y, 100);
    const std::vector<double> yhat = model::predict(d, fit.beta);
    std::vector<double> r(200);
    for (std::size_t t = 0; t < 200; ++t) {
        r[t] = y[t] - yhat[t];
    }
    mosum::MosumSeries series;
    series.mo = mosum::mosum_process(r, fit.sigma, 100, 50);
    series.bound = mosum::boundary_values(100, 200, 4.87);
    series.history = 100;
    const mosum::BreakResult want = mosum::detect(series);

    CHECK(map.results[0] == want);
    CHECK(map.valid[0] == 1);
    CHECK(map.lambda == 4.87);
    REQUIRE(map.mosum.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(map.mosum[i] == series.mo[i]);
    }
}

TEST_CASE("duplicated pixels give identical results") {
    const SeriesStack one = synthetic(1, 5, 0.01, 0.5);
    const SeriesStack many = with_pixels(one, std::vector<std::size_t>(37, 0));
    for (Backend b : {Backend::fused, Backend::naive}) {
        const BreakMap map = monitor_batch(many, fixed_config(b));
        for (const auto& r : map.results) {
            CHECK(r == map.results[0]);
        }
    }
}

TEST_CASE("fused and naive backends agree") {
    const SeriesStack stack = synthetic(1000, 6);
    MonitorConfig fused = fixed_config(Backend::fused);
    fused.keep_mosum = true;
    MonitorConfig naive = fused;
    naive.backend = Backend::naive;
    const BreakMap a = monitor_batch(stack, fused);
    const BreakMap b = monitor_batch(stack, naive);
    CHECK(a.results == b.results);
    CHECK(a.valid == b.valid);
    REQUIRE(a.mosum.size() == b.mosum.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.mosum.size(); ++i) {
        worst = std::max(worst, std::abs(a.mosum[i] - b.mosum[i]));
    }
    CHECK(worst <= 1e-9);
    CHECK(a.break_count() > 0);
}

TEST_CASE("results do not depend on worker count or block size") {
    const SeriesStack stack = synthetic(3000, 7);
    for (Backend b : {Backend::fused, Backend::naive}) {
        MonitorConfig c = fixed_config(b);
        c.threads = 1;
        const BreakMap base = monitor_batch(stack, c);
        for (int threads : {2, 4, 0}) {
            c.threads = threads;
            CHECK(monitor_batch(stack, c).results == base.results);
        }
        c.threads = 0;
        for (std::size_t block : {std::size_t{1}, std::size_t{7}, std::size_t{5000}}) {
            c.block_pixels = block;
            CHECK(monitor_batch(stack, c).results == base.results);
        }
    }
}

TEST_CASE("permuting pixels permutes results") {
    const SeriesStack stack = synthetic(500, 8);
    std::vector<std::size_t> order(500);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), std::mt19937_64(8));
    const BreakMap base = monitor_batch(stack, fixed_config());
    const BreakMap perm = monitor_batch(with_pixels(stack, order), fixed_config());
    for (std::size_t p = 0; p < order.size(); ++p) {
        CHECK(perm.results[p] == base.results[order[p]]);
    }
}

TEST_CASE("all-NaN pixels are masked and gaps are filled") {
    SeriesStack stack = synthetic(6, 9, 0.01, 0.5);
    auto data = stack.data();
    for (std::size_t t = 0; t < 200; ++t) {
        data[t * 6 + 2] = NAN;
    }
    data[0 * 6 + 4] = NAN;
    data[150 * 6 + 4] = NAN;
    for (Backend b : {Backend::fused, Backend::naive}) {
        const BreakMap map = monitor_batch(stack, fixed_config(b));
        CHECK(map.valid == std::vector<std::uint8_t>{1, 1, 0, 1, 1, 1});
        CHECK(map.results[2] == mosum::BreakResult{});
        CHECK(map.results[0].detected);
        CHECK(map.results[1].detected);
    }
}

TEST_CASE("a perfectly fitted history is a numerical error") {
    SeriesStack stack = synthetic(4, 10, 0.01, 0.0);
    auto data = stack.data();
    for (std::size_t t = 0; t < 200; ++t) {
        data[t * 4 + 3] = 0.25f;
    }
    CHECK_THROWS_AS(monitor_batch(stack, fixed_config(Backend::fused)), DegenerateScaleError);
    CHECK_THROWS_AS(monitor_batch(stack, fixed_config(Backend::naive)), DegenerateScaleError);
}

TEST_CASE("irregular axis runs on both backends") {
    const SeriesStack regular = synthetic(200, 11, 0.01, 0.5);
    std::vector<double> t(200);
    for (std::size_t i = 0; i < 200; ++i) {
        t[i] = 1.0 + 0.97 * i + 0.01 * (i % 3);
    }
    const SeriesStack stack(model::TimeAxis(t), 200,
                            std::vector<float>(regular.data().begin(), regular.data().end()));
    const BreakMap a = monitor_batch(stack, fixed_config(Backend::fused));
    const BreakMap b = monitor_batch(stack, fixed_config(Backend::naive));
    CHECK(a.results == b.results);
}

TEST_CASE("lambda is simulated when not given") {
    const SeriesStack stack = synthetic(20, 12);
    MonitorConfig c;
    c.history = 60;
    c.bandwidth = 15;
    c.calibration_reps = 2000;
    c.calibration_seed = 5;
    mosum::CriticalValueRequest req;
    req.alpha = 0.05;
    req.h_frac = 0.25;
    req.horizon = 200.0 / 60.0;
    req.n_sim = 60;
    req.reps = 2000;
    req.seed = 5;
    const double want = mosum::critical_value(req);
    CHECK(resolve_lambda(c, 200) == want);
    CHECK(monitor_batch(stack, c).lambda == want);
}

TEST_CASE("profiled runs report every phase") {
    const SeriesStack stack = synthetic(2000, 13);
    for (Backend b : {Backend::fused, Backend::naive}) {
        const auto [map, timings] = profile_run(stack, fixed_config(b));
        CHECK(map.results == monitor_batch(stack, fixed_config(b)).results);
        for (double v : {timings.ingest, timings.model, timings.predictions, timings.residuals,
                         timings.mosum, timings.breaks}) {
            CHECK(v >= 0.0);
        }
        CHECK(timings.total > 0.0);
        CHECK(timings.phase_sum() <= 1.05 * timings.total);
    }
}

TEST_CASE("model phase does not shrink with more pixels") {
    const SeriesStack small = synthetic(100000, 14);
    const SeriesStack large = synthetic(200000, 14);
    auto median_model = [](const SeriesStack& s) {
        std::vector<double> v;
        for (int i = 0; i < 5; ++i) {
            v.push_back(profile_run(s, fixed_config()).second.model);
        }
        std::sort(v.begin(), v.end());
        return v[2];
    };
    CHECK(median_model(large) >= median_model(small));
}

}
