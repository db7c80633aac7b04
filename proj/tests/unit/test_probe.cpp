#include <gtest/gtest.h>

#include <cmath>

#include "cfmm_privacy/probe.hpp"
#include "cfmm_privacy/rng.hpp"

using namespace cfmm;

TEST(Probe, FindsFeasibleTradeWithTargetImpact) {
    Rng rng(61);
    for (const auto& s : {TradingFunctionSpec::constant_product(2), TradingFunctionSpec::constant_mean({0.1, 0.9}),
                          TradingFunctionSpec::curve_like(2, 1.0, 1.0)}) {
        for (double fee : {1.0, 0.997}) {
            for (int trial = 0; trial < 10; ++trial) {
                const PoolState st{s, {rng.log_uniform(1, 1e6), rng.log_uniform(1, 1e6)}, fee};
                PoolOracle pool(st);
                const ProbeResult p = find_probe_trade(pool, 0, 1, fee);
                EXPECT_TRUE(is_feasible(st, p.trade)) << s.id();
                EXPECT_GT(p.input, 0.0);
                EXPECT_GT(p.output, 0.0);
                if (s.family == Family::CurveLike)
                    EXPECT_GT(p.impact, 0.0) << s.id();  // nearly linear until the output side is almost drained
                else
                    EXPECT_GE(p.impact, 0.1) << s.id();
                EXPECT_EQ(p.queries, pool.query_count());
            }
        }
    }
}

TEST(Probe, OutputIsTheExactQuoteUpToRounding) {
    // The midpoint of the accepted band reproduces the exact output far more
    // tightly than the band itself.
    const PoolState st{TradingFunctionSpec::constant_product(2), {1000.0, 5000.0}, 1.0};
    PoolOracle pool(st);
    const ProbeResult p = find_probe_trade(pool, 0, 1, 1.0);
    const double exact = st.reserves[1] * p.input / (st.reserves[0] + p.input);
    EXPECT_NEAR(p.output, exact, 1e-12 * exact);
}

TEST(Probe, RespectsMaxInput) {
    const PoolState st{TradingFunctionSpec::constant_product(2), {4.0, 9.0}, 1.0};
    PoolOracle pool(st);
    ProbeOptions opt;
    opt.max_input = 1e-3;
    opt.seed_input = 1e-3;
    opt.target_impact = std::numeric_limits<double>::infinity();
    const ProbeResult p = find_probe_trade(pool, 1, 0, 1.0, opt);
    EXPECT_EQ(p.input, 1e-3);
    EXPECT_EQ(p.trade[1], 1e-3);
    EXPECT_TRUE(is_feasible(st, p.trade));
}

TEST(Probe, InvalidPairs) {
    PoolOracle pool(PoolState{TradingFunctionSpec::constant_product(2), {4.0, 9.0}, 1.0});
    EXPECT_THROW(find_probe_trade(pool, 0, 0, 1.0), ValidationError);
    EXPECT_THROW(find_probe_trade(pool, 0, 2, 1.0), ValidationError);
    EXPECT_THROW(find_probe_trade(pool, 0, 1, 1.5), ValidationError);
}

TEST(Probe, QueryBudgetIsHonoured) {
    PoolOracle pool(PoolState{TradingFunctionSpec::constant_product(2), {4.0, 9.0}, 1.0});
    ProbeOptions opt;
    opt.query_budget = 400;
    try {
        find_probe_trade(pool, 0, 1, 1.0, opt);
    } catch (const SolverError&) {
    }
    EXPECT_LE(pool.query_count(), 400u + 300u);  // one refinement may straddle the limit
}
