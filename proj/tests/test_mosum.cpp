#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "breakwatch/error.hpp"
#include "breakwatch/mosum.hpp"
#include "oracles.hpp"

using namespace breakwatch;
using namespace breakwatch::mosum;

namespace {

std::vector<double> gaussian(std::size_t count, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> out(count);
    for (auto& v : out) {
        v = z(rng);
    }
    return out;
}

MosumSeries flat(std::vector<double> mo, double bound, std::size_t n) {
    MosumSeries s;
    s.bound.assign(mo.size(), bound);
    s.mo = std::move(mo);
    s.history = n;
    return s;
}

}  // namespace

TEST_SUITE("mosum") {

TEST_CASE("log plus") {
    CHECK(log_plus(0.5) == 1.0);
    CHECK(log_plus(std::numbers::e) == 1.0);
    CHECK(log_plus(10.0) == doctest::Approx(std::log(10.0)));
}

TEST_CASE("residuals only in the history give a zero process") {
    std::vector<double> r(40, 0.0);
    for (std::size_t i = 0; i < 20; ++i) {
        r[i] = 0.0;
    }
    const auto mo = mosum_process(r, 1.0, 20, 10);
    REQUIRE(mo.size() == 20);
    for (double v : mo) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("single residual enters exactly the windows covering it") {
    // n = 4, h = 2, N = 8: windows for t = 5..8 are {4,5}, {5,6}, {6,7}, {7,8}.
    std::vector<double> r(8, 0.0);
    r[5] = 3.0;  // t0 = 6
    const auto mo = mosum_process(r, 1.0, 4, 2);
    REQUIRE(mo.size() == 4);
    CHECK(mo[0] == 0.0);
    CHECK(mo[1] == 1.5);
    CHECK(mo[2] == 1.5);
    CHECK(mo[3] == 0.0);

    // A value inside the history reaches only the first window.
    std::vector<double> early(8, 0.0);
    early[3] = -2.0;  // t0 = 4
    const auto mo_early = mosum_process(early, 1.0, 4, 2);
    CHECK(mo_early[0] == -1.0);
    CHECK(mo_early[1] == 0.0);
}

TEST_CASE("sliding updates match direct window sums") {
    std::mt19937_64 rng(100);
    const auto r = gaussian(200, rng, 0.7);
    const auto got = mosum_process(r, 0.7, 100, 50);
    const auto want = oracle::direct_mosum(r, 0.7, 100, 50);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::abs(got[i] - want[i]) <= 1e-10);
    }
}

TEST_CASE("window sizes at the extremes") {
    std::mt19937_64 rng(101);
    const auto r = gaussian(30, rng);
    for (std::size_t h : {std::size_t{1}, std::size_t{20}}) {
        const auto got = mosum_process(r, 1.3, 20, h);
        const auto want = oracle::direct_mosum(r, 1.3, 20, h);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got[i] - want[i]) <= 1e-12);
        }
    }
}

TEST_CASE("MOSUM argument errors") {
    const std::vector<double> r(10, 0.1);
    CHECK_THROWS_AS(mosum_process(r, 0.0, 5, 2), InvalidArgument);
    CHECK_THROWS_AS(mosum_process(r, -1.0, 5, 2), InvalidArgument);
    CHECK_THROWS_AS(mosum_process(r, 1.0, 5, 6), InvalidArgument);
    CHECK_THROWS_AS(mosum_process(r, 1.0, 5, 0), InvalidArgument);
    CHECK_THROWS_AS(mosum_process(r, 1.0, 10, 2), InvalidArgument);
}

TEST_CASE("scale equivariance") {
    std::mt19937_64 rng(102);
    const auto r = gaussian(200, rng);
    const auto base = mosum_process(r, 0.9, 100, 50);
    for (double c : {1e-3, 7.0, 2048.0}) {
        std::vector<double> scaled(r);
        for (auto& v : scaled) {
            v *= c;
        }
        const auto mo = mosum_process(scaled, 0.9 * c, 100, 50);
        for (std::size_t i = 0; i < mo.size(); ++i) {
            CHECK(std::abs(mo[i] - base[i]) <= 1e-12);
        }
    }
}

TEST_CASE("boundary starts on the plateau") {
    const auto b = boundary_values(100, 400, 2.5);
    REQUIRE(b.size() == 300);
    CHECK(b[0] == 2.5);
    CHECK(b[170] == 2.5);  // t = 271 <= 100 e
    CHECK(b[172] > 2.5);   // t = 273 > 100 e
}

TEST_CASE("boundary reaches sqrt 2 at t = n e^2") {
    const std::size_t n = 10000;
    const auto t = static_cast<std::size_t>(std::ceil(n * std::exp(2.0)));
    const auto b = boundary_values(n, t + 1, 1.7);
    CHECK(b[t - n - 1] == doctest::Approx(1.7 * std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("boundary is nondecreasing") {
    const auto b = boundary_values(100, 400, 3.1);
    for (std::size_t i = 1; i < b.size(); ++i) {
        CHECK(b[i] >= b[i - 1]);
    }
    CHECK_THROWS_AS(boundary_values(100, 100, 1.0), InvalidArgument);
    CHECK_THROWS_AS(boundary_values(10, 20, 0.0), InvalidArgument);
}

TEST_CASE("detect without crossing") {
    const BreakResult r = detect(flat({0.1, -1.9, 2.0}, 2.0, 50));
    CHECK_FALSE(r.detected);
    CHECK_FALSE(r.first_break.has_value());
    CHECK(r.max_abs_mo == 2.0);
}

TEST_CASE("detect a single crossing at monitor index 7") {
    std::vector<double> mo(12, 0.5);
    mo[6] = 4.0;
    const BreakResult r = detect(flat(mo, 2.0, 100));
    CHECK(r.detected);
    REQUIRE(r.first_break.has_value());
    CHECK(*r.first_break == 107);
    CHECK(r.max_abs_mo == 4.0);
}

TEST_CASE("detect a negative excursion") {
    const BreakResult r = detect(flat({0.5, -3.0}, 2.39, 100));
    CHECK(r.detected);
    CHECK(*r.first_break == 102);
    CHECK(r.max_abs_mo == 3.0);
}

TEST_CASE("ties do not trigger and lengths must agree") {
    CHECK_FALSE(detect(flat({2.0, -2.0}, 2.0, 10)).detected);
    MosumSeries bad = flat({1.0, 2.0}, 3.0, 10);
    bad.bound.pop_back();
    CHECK_THROWS_AS(detect(bad), InvalidArgument);
    CHECK_THROWS_AS(detect(flat({}, 1.0, 10)), InvalidArgument);
}

TEST_CASE("raising |MO| never removes a detection") {
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<std::size_t> pick(0, 49);
    std::uniform_real_distribution<double> grow(1.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        MosumSeries s = flat(gaussian(50, rng, 1.2), 2.5, 100);
        BreakResult before = detect(s);
        for (int step = 0; step < 10; ++step) {
            s.mo[pick(rng)] *= grow(rng);
            const BreakResult after = detect(s);
            CHECK(after.detected >= before.detected);
            if (before.detected) {
                CHECK(*after.first_break <= *before.first_break);
            }
            before = after;
        }
    }
}

TEST_CASE("upper quantile definition") {
    std::vector<double> sample;
    for (int i = 1; i <= 100; ++i) {
        sample.push_back(i);
    }
    std::shuffle(sample.begin(), sample.end(), std::mt19937_64(1));
    CHECK(upper_quantile(sample, 0.05) == 95.0);
    CHECK(upper_quantile(sample, 0.01) == 99.0);
    CHECK(upper_quantile(sample, 0.5) == 50.0);
    CHECK(upper_quantile({3.0}, 0.05) == 3.0);
}

TEST_CASE("critical value request validation") {
    CriticalValueRequest req;
    req.reps = 999;
    CHECK_THROWS_AS(validate(req), InvalidArgument);
    req = {};
    req.alpha = 1.0;
    CHECK_THROWS_AS(validate(req), InvalidArgument);
    req = {};
    req.h_frac = 0.0;
    CHECK_THROWS_AS(validate(req), InvalidArgument);
    req = {};
    req.horizon = 1.0;
    CHECK_THROWS_AS(validate(req), InvalidArgument);
    req = {};
    req.n_sim = 8;
    CHECK_THROWS_AS(validate(req), InvalidArgument);
    CHECK_NOTHROW(validate(CriticalValueRequest{}));
}

TEST_CASE("critical value regression pin") {
    const CriticalValueRequest req;  // alpha 0.05, h/n 0.5, N/n 2, n 100, 1e5 reps, seed 1
    const double lambda = critical_value(req);
    CHECK(lambda == doctest::Approx(4.87419803).epsilon(1e-8));
    CHECK(critical_value(req) == lambda);
}

TEST_CASE("critical value grows as alpha shrinks") {
    CriticalValueRequest req;
    req.reps = 20000;
    req.seed = 77;
    const double at05 = critical_value(req);
    req.alpha = 0.01;
    const double at01 = critical_value(req);
    CHECK(at01 > at05);
}

TEST_CASE("critical value ignores the worker count") {
    CriticalValueRequest req;
    req.reps = 5000;
    req.seed = 9;
    req.threads = 1;
    const auto one = null_statistics(req);
    req.threads = 3;
    CHECK(null_statistics(req) == one);
}

}
