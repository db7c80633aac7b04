#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cfmm_privacy/mitigations.hpp"

using namespace cfmm;

namespace {
const PoolState kPool{TradingFunctionSpec::constant_product(2), {4.0, 9.0}, 1.0};
}

TEST(Noise, ZeroSigmaIsHonest) {
    for (std::uint64_t block : {0u, 1u, 77u}) EXPECT_EQ(noisy_price_oracle(kPool, {0.0, 5}, block), marginal_price(kPool));
}

TEST(Noise, FixedWithinABlockAndFreshAcrossBlocks) {
    const NoiseConfig cfg{0.01, 1234};
    const PriceVector a = noisy_price_oracle(kPool, cfg, 3);
    const PriceVector b = noisy_price_oracle(kPool, cfg, 3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, noisy_price_oracle(kPool, cfg, 4));
    EXPECT_EQ(a[1], 1.0);  // numeraire untouched

    NoisyPriceOracle oracle(kPool, cfg, 3);
    EXPECT_EQ(oracle.marginal_price(), oracle.marginal_price());
    EXPECT_EQ(oracle.marginal_price(), a);
}

TEST(Noise, LogNoiseHasTheConfiguredScale) {
    const NoiseConfig cfg{0.05, 99};
    const double truth = marginal_price(kPool)[0];
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int block = 0; block < n; ++block) {
        const double z = std::log(noisy_price_oracle(kPool, cfg, static_cast<std::uint64_t>(block))[0] / truth);
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.002);
    EXPECT_NEAR(std::sqrt(s2 / n), 0.05, 0.002);
}

TEST(Noise, TradesStayHonest) {
    NoisyPriceOracle oracle(kPool, {0.1, 1}, 0);
    EXPECT_TRUE(oracle.check_trade(Trade{{2.0, -3.0}}));
    EXPECT_FALSE(oracle.check_trade(Trade{{2.0, -3.5}}));
}

TEST(Batch, SingleTradeEqualsSequentialExecution) {
    const Trade t{{2.0, -3.0}};
    const BatchResult b = batch_execute(kPool, std::vector<Trade>{t});
    EXPECT_EQ(b.state.reserves, execute_trade(kPool, t).reserves);
    EXPECT_EQ(b.net, t);
}

TEST(Batch, NetOfTwoTradesIsApplied) {
    const PoolState st{TradingFunctionSpec::constant_product(2), {100.0, 100.0}, 1.0};
    // (10, -x) followed by (-5, y) netting to a feasible (5, -z).
    const Trade net = quote_output(st, 0, 5.0, 1);
    const double x = 9.0;
    const std::vector<Trade> batch{Trade{{10.0, -x}}, Trade{{-5.0, x + net[1]}}};
    const BatchResult b = batch_execute(st, batch);
    EXPECT_NEAR(b.state.reserves[0], 105.0, 1e-12);
    EXPECT_NEAR(b.state.reserves[1], 100.0 + net[1], 1e-12);
}

TEST(Batch, OppositeTradesCancel) {
    const std::vector<Trade> batch{Trade{{2.0, -3.0}}, Trade{{-2.0, 3.0}}};
    EXPECT_EQ(batch_execute(kPool, batch).state.reserves, kPool.reserves);
}

TEST(Batch, InfeasibleNetRejectsWholeBatch) {
    const std::vector<Trade> batch{Trade{{2.0, -3.0}}, Trade{{0.0, -1.0}}};
    EXPECT_THROW(batch_execute(kPool, batch), RejectedTrade);
}

TEST(Batch, DecoysMakeAFeasibleNet) {
    Rng rng(81);
    const PoolState st{TradingFunctionSpec::constant_mean({0.3, 0.3, 0.4}), {50.0, 80.0, 120.0}, 0.997};
    for (std::size_t count : {1u, 4u, 16u}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Trade hidden = quote_input(st, 0, 2, 0.05 * st.reserves[2]);
            const std::vector<Trade> decoys = sample_decoys(st, hidden, {count, 1e-4, 0.05}, rng);
            ASSERT_EQ(decoys.size(), count);
            std::vector<Trade> batch{hidden};
            batch.insert(batch.end(), decoys.begin(), decoys.end());
            EXPECT_NO_THROW(batch_execute(st, batch));
        }
    }
    EXPECT_TRUE(sample_decoys(st, Trade{{1.0, 0.0, -1.0}}, {0, 1e-4, 0.05}, rng).empty());
}
