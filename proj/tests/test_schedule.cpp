// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "mixsent/rng.hpp"
#include "mixsent/schedule.hpp"

using namespace mixsent;

namespace {

ScheduleConfig paper_cfg() {
    ScheduleConfig cfg;
    cfg.lr_max = 0.01;
    cfg.cut_frac = 0.1;
    cfg.ratio = 32.0;
    cfg.total_steps = 100;
    return cfg;
}

}  // namespace

TEST_CASE("stlr tabulated points") {
    const ScheduleConfig cfg = paper_cfg();
    CHECK(std::abs(stlr(0, cfg) - 3.125e-4) <= 1e-12);
    CHECK(std::abs(stlr(10, cfg) - 0.01) <= 1e-12);
    CHECK(std::abs(stlr(55, cfg) - 5.15625e-3) <= 1e-12);
    CHECK(std::abs(stlr(100, cfg) - 3.125e-4) <= 1e-12);
}

TEST_CASE("stlr shape properties") {
    const ScheduleConfig cfg = paper_cfg();
    const long cut = cfg.cut();
    CHECK(cut == 10);

    // peak exactly at cut
    for (long t = 0; t <= cfg.total_steps; ++t) {
        CHECK(stlr(t, cfg) <= stlr(cut, cfg) + 1e-15);
    }
    // piecewise linear: constant slope on each side
    const double up = stlr(1, cfg) - stlr(0, cfg);
    for (long t = 1; t < cut; ++t) {
        CHECK(std::abs((stlr(t + 1, cfg) - stlr(t, cfg)) - up) <= 1e-15);
    }
    const double down = stlr(cut + 1, cfg) - stlr(cut, cfg);
    for (long t = cut + 1; t < cfg.total_steps; ++t) {
        CHECK(std::abs((stlr(t + 1, cfg) - stlr(t, cfg)) - down) <= 1e-15);
    }

    CHECK_THROWS_AS(stlr(-1, cfg), StepOutOfRange);
    CHECK_THROWS_AS(stlr(101, cfg), StepOutOfRange);
}

TEST_CASE("stlr floor and peak for random configs") {
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        ScheduleConfig cfg;
        cfg.lr_max = 0.001 + rng.uniform() * 0.1;
        cfg.ratio = 2.0 + rng.uniform() * 60.0;
        cfg.cut_frac = 0.05 + rng.uniform() * 0.4;
        cfg.total_steps = 20 + static_cast<long>(rng.uniform_int(0, 400));
        if (cfg.cut() < 1) continue;
        CHECK(stlr(cfg.cut(), cfg) == doctest::Approx(cfg.lr_max).epsilon(1e-12));
        CHECK(stlr(0, cfg) == doctest::Approx(cfg.lr_max / cfg.ratio).epsilon(1e-12));
    }
}

TEST_CASE("discriminative_lrs values") {
    const auto lrs = discriminative_lrs(0.01, 2.6, 3);
    REQUIRE(lrs.size() == 3);
    CHECK(std::abs(lrs[0] - 0.01) <= 1e-8);
    CHECK(std::abs(lrs[1] - 3.84615e-3) <= 1e-8);
    CHECK(std::abs(lrs[2] - 1.47929e-3) <= 1e-8);

    for (double lr : discriminative_lrs(0.05, 1.0, 4)) CHECK(lr == 0.05);
    CHECK(discriminative_lrs(0.7, 2.0, 1) == std::vector<double>{0.7});
}

TEST_CASE("discriminative_lrs geometric property") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const double top = 1e-4 + rng.uniform() * 0.1;
        const double factor = 1.0 + rng.uniform() * 4.0;
        const int n = 1 + static_cast<int>(rng.uniform_int(0, 11));
        const auto lrs = discriminative_lrs(top, factor, n);
        REQUIRE(lrs.size() == static_cast<std::size_t>(n));
        CHECK(lrs[0] == top);
        for (std::size_t g = 1; g < lrs.size(); ++g) {
            CHECK(std::abs(lrs[g] * factor - lrs[g - 1]) <= 1e-12 * std::abs(lrs[g - 1]));
            if (factor > 1.0) CHECK(lrs[g] < lrs[g - 1]);
        }
    }
}

TEST_CASE("frozen_groups plan") {
    CHECK(frozen_groups(0, 6) == std::set<int>{1, 2, 3, 4, 5});
    CHECK(frozen_groups(2, 6) == std::set<int>{3, 4, 5});
    CHECK(frozen_groups(5, 6).empty());
    CHECK(frozen_groups(17, 6).empty());
    CHECK(frozen_groups(0, 1).empty());
}

TEST_CASE("unfreezing is monotone over epochs") {
    for (int n = 1; n <= 20; ++n) {
        for (int e1 = 0; e1 < 20; ++e1) {
            const auto later = frozen_groups(e1 + 1, n);
            const auto earlier = frozen_groups(e1, n);
            for (int g : later) CHECK(earlier.contains(g));
            if (e1 >= n - 1) CHECK(earlier.empty());
        }
    }
}
