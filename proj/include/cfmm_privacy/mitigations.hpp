// Pool-side mitigations: per-block randomized price reporting and order
// batching.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cfmm_privacy/core.hpp"
#include "cfmm_privacy/detail/roots.hpp"
#include "cfmm_privacy/oracle.hpp"
#include "cfmm_privacy/rng.hpp"

namespace cfmm {

/// Multiplicative log-normal noise on the reported price. The draw is a
/// pure function of (master_seed, block, asset), so it is fixed within a
/// block and averaging repeated queries gains nothing.
struct NoiseConfig {
    double sigma = 0.0;
    std::uint64_t master_seed = 0;
};

inline PriceVector noisy_price_oracle(const PoolState& state, const NoiseConfig& cfg, std::uint64_t block) {
    if (!(cfg.sigma >= 0.0)) throw ValidationError("noise sigma must be nonnegative");
    PriceVector p = marginal_price(state);
    if (cfg.sigma == 0.0) return p;
    const std::uint64_t block_seed = derive_seed(cfg.master_seed, block);
    for (std::size_t i = 0; i + 1 < p.components.size(); ++i) {
        Rng rng(derive_seed(block_seed, i));
        p.components[i] *= std::exp(cfg.sigma * rng.normal());
    }
    return p;
}

/// Honest on trades, noisy on price.
class NoisyPriceOracle : public PoolOracle {
public:
    NoisyPriceOracle(PoolState state, NoiseConfig cfg, std::uint64_t block = 0)
        : PoolOracle(std::move(state)), cfg_(cfg), block_(block) {}

    void set_block(std::uint64_t block) { block_ = block; }
    std::uint64_t block() const { return block_; }

protected:
    PriceVector do_marginal_price() override { return noisy_price_oracle(state_, cfg_, block_); }

private:
    NoiseConfig cfg_;
    std::uint64_t block_;
};

/// Decoy orders batched together with the trade being hidden.
struct BatchConfig {
    std::size_t decoy_count = 0;
    double min_fraction = 1e-4;  // decoy output size, fraction of the output reserve
    double max_fraction = 0.05;
};

struct BatchResult {
    PoolState state;
    Trade net;
};

inline Trade net_trade(std::span<const Trade> trades, std::size_t n) {
    Trade net{Vec(n, 0.0)};
    for (const Trade& t : trades) {
        if (t.size() != n) throw ValidationError("batch: trade length does not match the pool");
        for (std::size_t i = 0; i < n; ++i) net.delta[i] += t[i];
    }
    return net;
}

/// Applies the whole batch as its net trade; the batch is accepted or
/// rejected as a unit and no intermediate state exists.
inline BatchResult batch_execute(const PoolState& state, std::span<const Trade> trades) {
    Trade net = net_trade(trades, state.reserves.size());
    if (!is_feasible(state, net)) throw RejectedTrade("batch rejected: net trade is infeasible");
    PoolState next = state;
    for (std::size_t i = 0; i < next.reserves.size(); ++i) next.reserves[i] += net[i];
    return {std::move(next), std::move(net)};
}

/// Random decoy orders for one batch. Each decoy is a single-in/single-out
/// order on a uniformly chosen asset pair with log-uniform output size,
/// quoted against the pre-batch state. The output of the last decoy is then
/// re-solved so that the net of `hidden` plus all decoys is feasible.
inline std::vector<Trade> sample_decoys(const PoolState& state, const Trade& hidden, const BatchConfig& cfg, Rng& rng) {
    std::vector<Trade> decoys;
    if (cfg.decoy_count == 0) return decoys;
    if (!(cfg.min_fraction > 0.0) || !(cfg.max_fraction >= cfg.min_fraction) || cfg.max_fraction >= 1.0)
        throw ValidationError("decoy fractions must satisfy 0 < min <= max < 1");
    const std::size_t n = state.reserves.size();
    std::size_t last_out = 0;
    for (std::size_t k = 0; k < cfg.decoy_count; ++k) {
        const std::size_t in = rng.index(n);
        std::size_t out = rng.index(n - 1);
        if (out >= in) ++out;
        const double y = rng.log_uniform(cfg.min_fraction, cfg.max_fraction) * state.reserves[out];
        decoys.push_back(quote_input(state, in, out, y));
        last_out = out;
    }

    Trade base = hidden;
    for (std::size_t k = 0; k < decoys.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (k + 1 < decoys.size() || i != last_out) base.delta[i] += decoys[k][i];

    const double limit = state.reserves[last_out] + base[last_out];
    auto h = [&](double y) {
        Vec d = base.delta;
        d[last_out] -= y;
        for (std::size_t i = 0; i < n; ++i)
            if (state.reserves[i] + d[i] < 0.0) return -std::numeric_limits<double>::infinity();
        const Vec adj = fee_adjusted(d, state.fee);
        for (std::size_t i = 0; i < n; ++i)
            if (!(state.reserves[i] + adj[i] > 0.0)) return -std::numeric_limits<double>::infinity();
        return psi_change(state.spec, state.reserves, adj);
    };

    double hi = std::nextafter(limit, -std::numeric_limits<double>::infinity());
    double f_hi = h(hi);
    if (f_hi > 0.0) throw NoSolutionError("decoys: net batch cannot be made feasible");
    double y0 = -decoys.back()[last_out];
    double step = std::max(std::abs(y0), 1e-12 * state.reserves[last_out]);
    double lo = std::min(y0, hi);
    double f_lo = h(lo);
    for (int i = 0; !(f_lo > 0.0); ++i) {
        if (i > 2000) throw NoSolutionError("decoys: could not bracket the clearing output");
        lo -= step;
        step *= 2.0;
        f_lo = h(lo);
    }
    const auto root = detail::bisect(h, lo, hi, f_lo, f_hi);
    decoys.back().delta[last_out] = -root.x;
    return decoys;
}

}  // namespace cfmm
