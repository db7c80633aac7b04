// Query interface to a pool whose reserves are hidden from the caller.
#pragma once

#include <cstddef>

#include "cfmm_privacy/core.hpp"

namespace cfmm {

/// What an outside observer can ask a pool: its marginal price, whether a
/// trade would be accepted, and (state-changing) to execute a trade.
/// Every call is counted.
class CfmmOracle {
public:
    virtual ~CfmmOracle() = default;

    PriceVector marginal_price() {
        ++price_queries_;
        return do_marginal_price();
    }

    bool check_trade(const Trade& trade) {
        ++trade_queries_;
        return do_check_trade(trade);
    }

    /// Returns true if accepted; a rejected trade leaves the pool unchanged.
    bool execute(const Trade& trade) {
        ++trade_queries_;
        return do_execute(trade);
    }

    virtual std::size_t n_assets() const = 0;

    std::size_t query_count() const { return price_queries_ + trade_queries_; }
    std::size_t price_queries() const { return price_queries_; }
    std::size_t trade_queries() const { return trade_queries_; }

protected:
    virtual PriceVector do_marginal_price() = 0;
    virtual bool do_check_trade(const Trade& trade) = 0;
    virtual bool do_execute(const Trade& trade) = 0;

private:
    std::size_t price_queries_ = 0;
    std::size_t trade_queries_ = 0;
};

/// Honest oracle over an in-memory pool.
class PoolOracle : public CfmmOracle {
public:
    explicit PoolOracle(PoolState state) : state_(std::move(state)) { state_.validate(); }

    std::size_t n_assets() const override { return state_.reserves.size(); }

    /// Ground truth, for simulators and tests; not part of the observer's view.
    const PoolState& hidden_state() const { return state_; }

protected:
    PriceVector do_marginal_price() override { return cfmm::marginal_price(state_); }
    bool do_check_trade(const Trade& trade) override { return is_feasible(state_, trade); }
    bool do_execute(const Trade& trade) override {
        if (!is_feasible(state_, trade)) return false;
        state_ = execute_trade(state_, trade);
        return true;
    }

    PoolState state_;
};

}  // namespace cfmm
