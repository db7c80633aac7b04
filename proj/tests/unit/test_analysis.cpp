#include <gtest/gtest.h>

#include <cmath>

#include "cfmm_privacy/analysis.hpp"
#include "cfmm_privacy/rng.hpp"

using namespace cfmm;

TEST(LogGrid, EndpointsAndSpacing) {
    const Vec g = log_grid(0.1, 10.0, 50);
    ASSERT_EQ(g.size(), 50u);
    EXPECT_EQ(g.front(), 0.1);
    EXPECT_EQ(g.back(), 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(std::log(g[i] / g[i - 1]), std::log(100.0) / 49, 1e-12);
    EXPECT_THROW(log_grid(0.0, 1.0, 3), ValidationError);
}

TEST(RayInvariance, HoldsForHomogeneousFamilies) {
    Rng rng(71);
    const Vec scales = log_grid(0.5, 10.0, 20);
    for (const auto& s : {TradingFunctionSpec::constant_product(3), TradingFunctionSpec::constant_mean({0.1, 0.9}),
                          TradingFunctionSpec::constant_mean({0.4, 0.6}, 3.0), TradingFunctionSpec::constant_sum(2)}) {
        Vec r(s.n_assets);
        for (double& v : r) v = rng.log_uniform(0.1, 1e3);
        const GeometryReport rep = verify_ray_invariance(s, r, scales);
        EXPECT_TRUE(rep.pass) << s.id() << " " << rep.max_violation;
        EXPECT_EQ(rep.samples, scales.size());
        EXPECT_EQ(rep.tolerance, 1e-9);
    }
}

TEST(RayInvariance, FailsForCurveLike) {
    const auto s = TradingFunctionSpec::curve_like(2, 1.0, 1.0);
    const GeometryReport rep = verify_ray_invariance(s, Vec{1.0, 4.0}, log_grid(0.5, 10.0, 20));
    EXPECT_FALSE(rep.pass);
    // Price ratio (1 + 1/R1^2) / (1 + 1/R2^2) is monotone in k, so the worst
    // deviation from k = 1 sits at an end of the grid.
    auto ratio = [](double k) { return (1.0 + 1.0 / (k * k)) / (1.0 + 1.0 / (16.0 * k * k)); };
    const double base = ratio(1.0);
    const double expect = std::max(std::abs(ratio(0.5) - base), std::abs(ratio(10.0) - base)) / base;
    EXPECT_NEAR(rep.max_violation, expect, 1e-12);
    EXPECT_GE(rep.max_violation, 0.05);
}

TEST(ScaleSign, PassesForFeasibleTradesOnHomogeneousPools) {
    Rng rng(72);
    const Vec grid = default_scale_grid();
    for (int trial = 0; trial < 40; ++trial) {
        const double w = rng.uniform(0.1, 0.9);
        const auto s = trial % 2 ? TradingFunctionSpec::constant_product(2) : TradingFunctionSpec::constant_mean({w, 1.0 - w});
        const Vec r{rng.uniform(1, 1e6), rng.uniform(1, 1e6)};
        const Trade t = quote_output(PoolState{s, r, 1.0}, 0, rng.log_uniform(1e-3, 1.0) * r[0], 1);
        const GeometryReport rep = scan_scale_sign(s, r, t, grid);
        EXPECT_TRUE(rep.pass) << s.id() << " " << rep.max_violation;
    }
}

TEST(ScaleSign, DetectsAWrongScale) {
    // A trade feasible at 2R is "too cheap" at R, so g(1) > 0 and the k < 2 part
    // of the grid has the wrong sign.
    const auto s = TradingFunctionSpec::constant_product(2);
    const Vec r{10.0, 10.0};
    const Trade t = quote_output(PoolState{s, {20.0, 20.0}, 1.0}, 0, 5.0, 1);
    const GeometryReport rep = scan_scale_sign(s, r, t, default_scale_grid());
    EXPECT_FALSE(rep.pass);
    EXPECT_GT(rep.max_violation, 0.0);
}

TEST(ScaleSign, ExactZeroAtUnitScale) {
    const auto s = TradingFunctionSpec::constant_product(2);
    const Vec r{4.0, 9.0};
    const GeometryReport rep = scan_scale_sign(s, r, Trade{{2.0, -3.0}}, Vec{0.5, 1.0, 2.0});
    EXPECT_TRUE(rep.pass);
}
