// Building a valid, nonzero trade using nothing but accept/reject answers.
//
// The pool accepts a trade when psi changes by at most the feasibility
// band. For a fixed input x the accepted outputs form a short interval
// around the exact output y*(x); its two edges can be located by bisection
// once any accepted point is known, and their midpoint is y*(x) to within
// rounding. Tiny deposits with no withdrawal are always accepted, which
// gives a seed. From there the input is grown step by step, predicting the
// next accepted output by polynomial extrapolation of the y*(x) points found
// so far; a rejected prediction shrinks the step.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cfmm_privacy/core.hpp"
#include "cfmm_privacy/detail/roots.hpp"
#include "cfmm_privacy/oracle.hpp"

namespace cfmm {

struct ProbeOptions {
    double seed_input = 1.0;          // first deposit tried when looking for a seed
    double target_impact = 0.1;       // stop once the execution price has moved this much
    double max_input = std::numeric_limits<double>::infinity();
    std::size_t query_budget = 200000;
    std::size_t max_steps = 400;
};

struct ProbeResult {
    Trade trade;
    double input = 0.0;
    double output = 0.0;
    double impact = 0.0;  // 1 - (y/x) / (y0/x0) relative to the seed's execution price
    std::size_t queries = 0;
    std::size_t steps = 0;
};

namespace detail {

class ProbeSearch {
public:
    ProbeSearch(CfmmOracle& oracle, std::size_t in, std::size_t out, double fee, const ProbeOptions& opt)
        : oracle_(oracle), n_(oracle.n_assets()), in_(in), out_(out), fee_(fee), opt_(opt), start_(oracle.query_count()) {}

    bool accepts(double x, double y) { return oracle_.check_trade(pair_trade(n_, in_, x, out_, y)); }

    std::size_t used() const { return oracle_.query_count() - start_; }
    bool exhausted() const { return used() + 8 >= opt_.query_budget; }

    // Output coordinate as the pool sees it after the fee discount.
    double to_adjusted(double y) const { return y >= 0.0 ? y : fee_ * y; }
    double from_adjusted(double a) const { return a >= 0.0 ? a : a / fee_; }

    struct Band {
        double mid;
        double width;
    };

    /// Locates both edges of the accepted interval containing y_in.
    Band refine(double x, double y_in, double step) {
        auto pred = [&](double y) { return accepts(x, y); };
        step = std::max(step, std::numeric_limits<double>::min());

        double up = y_in + step;
        for (int i = 0; pred(up); ++i) {
            if (i > 300) throw ConvergenceError("probe: accepted interval is unbounded above");
            step *= 2.0;
            up = y_in + step;
        }
        const auto upper = bisect_predicate(pred, y_in, up);

        double down_step = std::max(step, std::numeric_limits<double>::min());
        double down = y_in - down_step;
        for (int i = 0; pred(down); ++i) {
            if (i > 300) throw ConvergenceError("probe: accepted interval is unbounded below");
            down_step *= 2.0;
            down = y_in - down_step;
        }
        const auto lower = bisect_predicate(pred, y_in, down);

        const double mid = from_adjusted(0.5 * (to_adjusted(lower.first) + to_adjusted(upper.first)));
        return {pred(mid) ? mid : y_in, upper.first - lower.first};
    }

    ProbeResult run() {
        // Seed: a pure deposit small enough to stay inside the band.
        double x = std::min(opt_.seed_input, opt_.max_input);
        if (!(x > 0.0)) throw ValidationError("probe: seed input must be positive");
        while (!accepts(x, 0.0)) {
            x *= 0.5;
            if (x < std::numeric_limits<double>::min() || exhausted())
                throw ConvergenceError("probe: no accepted seed trade found");
        }
        Band band = refine(x, 0.0, x);
        if (!(band.mid > 0.0)) throw ConvergenceError("probe: seed trade has no output side");

        std::vector<double> xs{0.0, x};
        std::vector<double> ys{0.0, band.mid};
        const double seed_slope = band.mid / x;
        double width = band.width;
        double ratio = 1.0;
        std::size_t steps = 0;

        auto impact = [&] { return 1.0 - (ys.back() / xs.back()) / seed_slope; };

        while (steps < opt_.max_steps && !exhausted()) {
            if (impact() >= opt_.target_impact || xs.back() >= opt_.max_input) break;
            const double x_next = std::min(xs.back() * (1.0 + ratio), opt_.max_input);
            const std::size_t k = std::min<std::size_t>(xs.size(), 5);
            const std::vector<double> px(xs.end() - static_cast<std::ptrdiff_t>(k), xs.end());
            const std::vector<double> py(ys.end() - static_cast<std::ptrdiff_t>(k), ys.end());
            const double y_pred = neville(px, py, x_next);
            ++steps;
            if (std::isfinite(y_pred) && accepts(x_next, y_pred)) {
                band = refine(x_next, y_pred, width);
                xs.push_back(x_next);
                ys.push_back(band.mid);
                width = band.width;
                ratio = std::min(2.0 * ratio, 15.0);
            } else {
                ratio *= 0.25;
                if (ratio < 1e-6) break;
            }
        }

        ProbeResult res;
        res.input = xs.back();
        res.output = ys.back();
        res.trade = pair_trade(n_, in_, res.input, out_, res.output);
        res.impact = impact();
        res.queries = used();
        res.steps = steps;
        return res;
    }

private:
    CfmmOracle& oracle_;
    std::size_t n_, in_, out_;
    double fee_;
    ProbeOptions opt_;
    std::size_t start_;
};

}  // namespace detail

/// Finds a precise feasible single-in/single-out trade (asset `in` tendered,
/// asset `out` withdrawn) using check_trade answers only. The caller knows
/// the fee parameter of the pool it is attacking.
inline ProbeResult find_probe_trade(CfmmOracle& oracle, std::size_t in, std::size_t out, double fee,
                                    const ProbeOptions& options = {}) {
    const std::size_t n = oracle.n_assets();
    if (in >= n || out >= n || in == out) throw ValidationError("probe: invalid asset pair");
    if (!(fee > 0.0) || fee > 1.0) throw ValidationError("probe: fee must lie in (0, 1]");
    return detail::ProbeSearch(oracle, in, out, fee, options).run();
}

}  // namespace cfmm
