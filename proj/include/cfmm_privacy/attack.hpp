// Reserve reconstruction from a marginal price plus one feasible trade, and
// the trade-recovery attack built on top of it.
//
// For a homogeneous, strictly concave psi the reserves consistent with a
// price c form a ray {k R0 : k > 0}, and along that ray
//     g(k) = psi(k R0 + D) - psi(k R0)
// is negative below the true scale and positive above it. Recovery is
// therefore: one point on the ray, then a one-dimensional root find.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "cfmm_privacy/core.hpp"
#include "cfmm_privacy/detail/dense.hpp"
#include "cfmm_privacy/detail/roots.hpp"
#include "cfmm_privacy/lp.hpp"
#include "cfmm_privacy/oracle.hpp"
#include "cfmm_privacy/probe.hpp"

namespace cfmm {

struct RecoveryResult {
    Vec reserves;
    double lambda = 0.0;          // grad psi(R) = lambda * c
    double residual_price = 0.0;  // || grad psi(R) - lambda c ||
    double residual_trade = 0.0;  // | psi(R + D') - psi(R) |, D' fee-adjusted
    bool unique = false;          // true when psi has a homogeneity degree
};

namespace detail {

inline void require_trade(const TradingFunctionSpec& spec, const Trade& trade) {
    if (trade.size() != spec.n_assets) throw ValidationError("trade length does not match the number of assets");
    if (!trade.is_finite()) throw ValidationError("trade must be finite");
    if (trade.is_zero()) throw ValidationError("trade must be nonzero");
}

inline void require_price(const TradingFunctionSpec& spec, const PriceVector& c) {
    if (c.size() != spec.n_assets) throw ValidationError("price length does not match the number of assets");
    for (double v : c.components)
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("price components must be strictly positive");
}

/// Least-squares multiplier: argmin_l || g - l c ||.
inline double fit_lambda(std::span<const double> g, std::span<const double> c) { return dot(g, c) / dot(c, c); }

inline double price_residual(std::span<const double> g, double lambda, std::span<const double> c) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += (g[i] - lambda * c[i]) * (g[i] - lambda * c[i]);
    return std::sqrt(s);
}

/// psi(R + d) - psi(R) with "leaves the domain" mapped to -inf.
inline double signed_change(const TradingFunctionSpec& spec, std::span<const double> r, std::span<const double> d) {
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!(r[i] + d[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    return psi_change(spec, r, d);
}

inline RecoveryResult finish(const TradingFunctionSpec& spec, Vec reserves, const PriceVector& c, const Vec& adj,
                             bool unique) {
    RecoveryResult out;
    const Vec g = grad_psi(spec, reserves);
    out.lambda = fit_lambda(g, c.components);
    out.residual_price = price_residual(g, out.lambda, c.components);
    out.residual_trade = std::abs(signed_change(spec, reserves, adj));
    out.unique = unique;
    out.reserves = std::move(reserves);
    return out;
}

inline void check_tolerances(const TradingFunctionSpec& spec, const RecoveryResult& r) {
    const double gnorm = norm2(grad_psi(spec, r.reserves));
    if (!(r.residual_price <= 1e-8 * gnorm)) throw ConvergenceError("recovery: price equations not satisfied");
    if (!(r.residual_trade <= feasibility_tolerance(spec, r.reserves)))
        throw ConvergenceError("recovery: trade equation not satisfied");
}

}  // namespace detail

/// Two-asset constant-product pool: the system is linear,
///     c1 R1 - c2 R2 = 0,   D2 R1 + D1 R2 = -D1 D2,
/// and lambda = 1 / (2 sqrt(c1 c2)).
inline RecoveryResult recover_reserves_cp_closed_form(const PriceVector& c, const Trade& trade) {
    if (c.size() != 2 || trade.size() != 2) throw ValidationError("closed form needs a two-asset pool");
    const auto spec = TradingFunctionSpec::constant_product(2);
    detail::require_price(spec, c);
    detail::require_trade(spec, trade);
    const double c1 = c[0], c2 = c[1], d1 = trade[0], d2 = trade[1];

    const double det = c1 * d1 + c2 * d2;
    const double mag = std::abs(c1 * d1) + std::abs(c2 * d2);
    if (!(std::abs(det) > 4.0 * std::numeric_limits<double>::epsilon() * mag))
        throw SingularSystemError("closed form: price and trade give a singular system (c . D = 0)");

    Vec r{-c2 * d1 * d2 / det, -c1 * d1 * d2 / det};
    if (!(r[0] > 0.0) || !(r[1] > 0.0)) throw SolverError("closed form: data is inconsistent with positive reserves");

    RecoveryResult out = detail::finish(spec, r, c, trade.delta, true);
    out.lambda = 1.0 / (2.0 * std::sqrt(c1 * c2));
    out.residual_price = detail::price_residual(grad_psi(spec, out.reserves), out.lambda, c.components);
    return out;
}

/// One point R0 of the price ray, normalized to psi(R0) = 1. Closed form for
/// the geometric-mean families: R0_i proportional to w_i / c_i.
inline Vec price_consistent_point(const TradingFunctionSpec& spec, const PriceVector& c) {
    spec.validate();
    detail::require_price(spec, c);
    if (!spec.homogeneous()) throw UnsupportedFamily("price ray only exists for homogeneous trading functions");
    if (spec.family == Family::ConstantSum)
        throw UnsupportedFamily("constant-sum pools have no unique reserve point per price");
    Vec v(spec.n_assets);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = spec.weight(i) / c[i];
    const double scale = std::pow(eval_psi(spec, v), -1.0 / *spec.degree);
    for (double& x : v) x *= scale;
    return v;
}

struct NewtonOptions {
    std::size_t max_iter = 100;
    double tolerance = 1e-10;
};

/// Damped Newton on  grad psi(R) = lambda c,  psi(R) = 1  in (R, lambda).
/// Works for any smooth homogeneous family; the geometric-mean families
/// also have the closed form above.
inline Vec price_consistent_point_newton(const TradingFunctionSpec& spec, const PriceVector& c,
                                         const NewtonOptions& opt = {}) {
    spec.validate();
    detail::require_price(spec, c);
    if (!spec.homogeneous()) throw UnsupportedFamily("price ray only exists for homogeneous trading functions");
    if (spec.family == Family::ConstantSum)
        throw UnsupportedFamily("constant-sum pools have no unique reserve point per price");
    const std::size_t n = spec.n_assets;

    Vec r(n, 1.0);
    {
        const double s = std::pow(eval_psi(spec, r), -1.0 / *spec.degree);
        for (double& x : r) x *= s;
    }
    double lambda = detail::fit_lambda(grad_psi(spec, r), c.components);

    auto residual = [&](const Vec& rr, double l) {
        const Vec g = grad_psi(spec, rr);
        Vec f(n + 1);
        const double scale = l * detail::norm2(c.components);
        for (std::size_t i = 0; i < n; ++i) f[i] = (g[i] - l * c[i]) / scale;
        f[n] = eval_psi(spec, rr) - 1.0;
        return f;
    };

    Vec f = residual(r, lambda);
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        if (detail::norm_inf(f) <= opt.tolerance) return r;
        const Matrix h = hess_psi(spec, r);
        const Vec g = grad_psi(spec, r);
        Matrix j(n + 1, n + 1, 0.0);
        Vec rhs(n + 1);
        const double scale = lambda * detail::norm2(c.components);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) j(a, b) = h(a, b) / scale;
            j(a, n) = -c[a] / scale;
            j(n, a) = g[a];
        }
        for (std::size_t a = 0; a <= n; ++a) rhs[a] = -f[a];
        const Vec step = detail::solve_dense(j, rhs);

        double t = 1.0;
        bool moved = false;
        for (int half = 0; half < 60; ++half, t *= 0.5) {
            Vec trial(n);
            bool positive = true;
            for (std::size_t a = 0; a < n; ++a) {
                trial[a] = r[a] + t * step[a];
                positive = positive && trial[a] > 0.0;
            }
            const double l = lambda + t * step[n];
            if (!positive || !(l > 0.0)) continue;
            const Vec ft = residual(trial, l);
            if (detail::norm2(ft) < detail::norm2(f)) {
                r = std::move(trial);
                lambda = l;
                f = ft;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (detail::norm_inf(f) <= opt.tolerance) return r;
    throw ConvergenceError("price point: Newton iteration did not converge");
}

/// Scale k > 0 with psi(k R0 + D') = psi(k R0), D' = gamma D+ - D-.
/// Geometric bracket expansion from k = 1, then bisection until the bracket
/// is narrower than 1e-14 k.
inline double solve_scale(const TradingFunctionSpec& spec, std::span<const double> r0, const Trade& trade, double fee) {
    detail::require_trade(spec, trade);
    detail::require_size(spec, r0.size());
    detail::require_positive(r0);
    const Vec adj = fee_adjusted(trade.delta, fee);
    const std::size_t n = r0.size();

    auto g = [&](double k) {
        Vec kr(n);
        for (std::size_t i = 0; i < n; ++i) kr[i] = k * r0[i];
        return detail::signed_change(spec, kr, adj);
    };

    double lo = 1.0, hi = 1.0;
    double g_lo = g(1.0), g_hi = g_lo;
    if (g_lo == 0.0) return 1.0;
    if (g_lo < 0.0) {
        while (g_hi < 0.0) {
            lo = hi;
            g_lo = g_hi;
            hi *= 2.0;
            if (hi > 1e12) throw BracketError("solve_scale: no sign change for k <= 1e12");
            g_hi = g(hi);
        }
    } else {
        while (g_lo > 0.0) {
            hi = lo;
            g_hi = g_lo;
            lo *= 0.5;
            if (lo < 1e-12) throw BracketError("solve_scale: no sign change for k >= 1e-12");
            g_lo = g(lo);
        }
    }
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    return detail::bisect(g, lo, hi, g_lo, g_hi, 1e-14).x;
}

namespace detail {

/// CurveLike: damped Newton on the full system in (R, lambda),
///     grad psi(R) - lambda c = 0,   psi(R + D') - psi(R) = 0,
/// started from the point of the price curve R_i(l) = sqrt(beta / (l c_i - alpha))
/// where the trade residual changes sign.
inline RecoveryResult recover_curve_like(const TradingFunctionSpec& spec, const PriceVector& c, const Vec& adj,
                                         const NewtonOptions& opt) {
    const std::size_t n = spec.n_assets;
    const double cmin = *std::min_element(c.components.begin(), c.components.end());
    const double l_min = spec.alpha / cmin;

    auto on_curve = [&](double l) {
        Vec r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = std::sqrt(spec.beta / (l * c[i] - spec.alpha));
        return r;
    };
    auto curve_residual = [&](double l) {
        const Vec r = on_curve(l);
        return signed_change(spec, r, adj) / std::max(1.0, std::abs(eval_psi(spec, r)));
    };

    // Scan l on a log grid above l_min; large l means small reserves.
    double l = std::numeric_limits<double>::quiet_NaN();
    double prev_t = 0.0, prev_f = 0.0;
    bool have_prev = false;
    for (int i = 0; i <= 400; ++i) {
        const double t = std::pow(10.0, -12.0 + 20.0 * i / 400.0);
        const double f = curve_residual(l_min * (1.0 + t));
        if (have_prev && std::isfinite(prev_f) && ((prev_f > 0.0) != (f > 0.0))) {
            auto h = [&](double tt) { return curve_residual(l_min * (1.0 + tt)); };
            const auto root = bisect(h, prev_t, t, prev_f, f, 1e-15);
            l = l_min * (1.0 + root.x);
            break;
        }
        prev_t = t;
        prev_f = f;
        have_prev = true;
    }
    if (!std::isfinite(l)) throw BracketError("curve-like recovery: no reserves on the price curve accept the trade");

    Vec r = on_curve(l);
    double lambda = l;
    auto residual = [&](const Vec& rr, double ll) {
        Vec f(n + 1);
        const Vec g = grad_psi(spec, rr);
        const double ps = ll * norm2(c.components);
        for (std::size_t i = 0; i < n; ++i) f[i] = (g[i] - ll * c[i]) / ps;
        f[n] = signed_change(spec, rr, adj) / std::max(1.0, std::abs(eval_psi(spec, rr)));
        return f;
    };
    Vec f = residual(r, lambda);
    for (std::size_t it = 0; it < opt.max_iter && norm_inf(f) > opt.tolerance * 1e-3; ++it) {
        const Matrix h = hess_psi(spec, r);
        Vec shifted(n);
        for (std::size_t i = 0; i < n; ++i) shifted[i] = r[i] + adj[i];
        const Vec g0 = grad_psi(spec, r);
        const Vec g1 = grad_psi(spec, shifted);
        const double ps = lambda * norm2(c.components);
        const double ts = std::max(1.0, std::abs(eval_psi(spec, r)));
        Matrix j(n + 1, n + 1, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) j(a, b) = h(a, b) / ps;
            j(a, n) = -c[a] / ps;
            j(n, a) = (g1[a] - g0[a]) / ts;
        }
        Vec rhs(n + 1);
        for (std::size_t a = 0; a <= n; ++a) rhs[a] = -f[a];
        Vec step;
        try {
            step = solve_dense(j, rhs);
        } catch (const SingularSystemError&) {
            break;
        }
        bool moved = false;
        double t = 1.0;
        for (int half = 0; half < 60; ++half, t *= 0.5) {
            Vec trial(n);
            bool ok = true;
            for (std::size_t a = 0; a < n; ++a) {
                trial[a] = r[a] + t * step[a];
                ok = ok && trial[a] > 0.0 && trial[a] + adj[a] > 0.0;
            }
            const double ll = lambda + t * step[n];
            if (!ok || !(ll > 0.0)) continue;
            const Vec ft = residual(trial, ll);
            if (norm2(ft) < norm2(f)) {
                r = std::move(trial);
                lambda = ll;
                f = ft;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (norm_inf(f) > opt.tolerance) throw ConvergenceError("curve-like recovery: Newton iteration did not converge");
    return finish(spec, r, c, adj, false);
}

}  // namespace detail

/// Solves grad psi(R) = lambda c, psi(R + D') = psi(R) for R.
inline RecoveryResult recover_reserves(const TradingFunctionSpec& spec, const PriceVector& c, const Trade& trade,
                                       double fee = 1.0) {
    spec.validate();
    detail::require_price(spec, c);
    detail::require_trade(spec, trade);
    if (!(fee > 0.0) || fee > 1.0) throw ValidationError("fee parameter gamma must lie in (0, 1]");
    if (spec.family == Family::ConstantSum)
        throw UnsupportedFamily("constant-sum pools need the binary-search attack (recover_reserves_constant_sum)");

    const Vec adj = fee_adjusted(trade.delta, fee);
    RecoveryResult out;
    if (spec.homogeneous()) {
        Vec r = price_consistent_point(spec, c);
        const double k = solve_scale(spec, r, trade, fee);
        for (double& v : r) v *= k;
        out = detail::finish(spec, std::move(r), c, adj, true);
    } else {
        out = detail::recover_curve_like(spec, c, adj, NewtonOptions{});
    }
    detail::check_tolerances(spec, out);
    return out;
}

struct AttackOptions {
    ProbeOptions probe;
    std::size_t probe_in = 0;
    std::optional<std::size_t> probe_out;  // defaults to the last asset
    double constant_sum_epsilon = 1e-6;     // per-component accuracy of the recovered trade
};

/// Steps 1-2 of the attack against one pool snapshot: read the price, build a
/// valid probe trade, solve for the reserves. Constant-sum pools dispatch to
/// the binary search.
inline RecoveryResult recover_from_oracle(CfmmOracle& oracle, const TradingFunctionSpec& spec, double fee,
                                          const AttackOptions& opt = {});

inline Vec recover_reserves_constant_sum(CfmmOracle& oracle, double epsilon, double fee = 1.0);

namespace detail {
inline Vec constant_sum_search(CfmmOracle& oracle, const PriceVector& c, double epsilon, double fee);
}

/// Alice's hidden trade as the difference of the reserves reconstructed
/// before and after it.
inline Trade recover_trade(CfmmOracle& before, CfmmOracle& after, const TradingFunctionSpec& spec, double fee,
                           const AttackOptions& opt = {}) {
    const RecoveryResult r0 = recover_from_oracle(before, spec, fee, opt);
    const RecoveryResult r1 = recover_from_oracle(after, spec, fee, opt);
    Trade t{Vec(r0.reserves.size())};
    for (std::size_t i = 0; i < t.delta.size(); ++i) t.delta[i] = r1.reserves[i] - r0.reserves[i];
    return t;
}

inline RecoveryResult recover_from_oracle(CfmmOracle& oracle, const TradingFunctionSpec& spec, double fee,
                                          const AttackOptions& opt) {
    spec.validate();
    if (oracle.n_assets() != spec.n_assets) throw ValidationError("oracle and trading function disagree on the number of assets");
    if (spec.family == Family::ConstantSum) {
        RecoveryResult out;
        const PriceVector c = oracle.marginal_price();
        out.reserves = detail::constant_sum_search(oracle, c, 0.5 * opt.constant_sum_epsilon, fee);
        const Vec g = grad_psi(spec, out.reserves);
        out.lambda = detail::fit_lambda(g, c.components);
        out.residual_price = detail::price_residual(g, out.lambda, c.components);
        out.unique = false;
        return out;
    }
    const PriceVector c = oracle.marginal_price();
    const std::size_t out_asset = opt.probe_out.value_or(spec.n_assets - 1);
    const ProbeResult probe = find_probe_trade(oracle, opt.probe_in, out_asset, fee, opt.probe);
    return recover_reserves(spec, c, probe.trade, fee);
}

namespace detail {

/// maximize t  s.t.  D c >= t 1,  sum c = 1,  c >= 0   (t free, split as t+ - t-).
/// For t* > 0 this is the system  c . D^i >= 1, c >= 0  with minimal sum c,
/// rescaled; t* = 0 covers linear trading functions where every probe is
/// exactly price-neutral.
inline PriceVector price_from_probe_matrix(const Matrix& d) {
    const std::size_t n = d.cols();
    if (normalized_volume(d) < 1e-13) throw DegenerateProbeError("price estimate: probe directions are linearly dependent");

    double scale = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) scale = std::max(scale, norm_inf(d.row(i)));

    lp::LinearProgram prog;
    prog.objective.assign(n + 2, 0.0);
    prog.objective[n] = 1.0;
    prog.objective[n + 1] = -1.0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
        Vec row(n + 2, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[j] = d(i, j) / scale;
        row[n] = -1.0;
        row[n + 1] = 1.0;
        prog.add(std::move(row), lp::Relation::GreaterEqual, 0.0);
    }
    Vec sum(n + 2, 0.0);
    for (std::size_t j = 0; j < n; ++j) sum[j] = 1.0;
    prog.add(std::move(sum), lp::Relation::Equal, 1.0);

    const lp::Solution sol = lp::solve(prog, 1e-15);
    if (sol.status != lp::Status::Optimal) throw InfeasibleLpError("price estimate: linear program has no solution");
    const double t = sol.x[n] - sol.x[n + 1];
    if (t < -1e-12) throw InfeasibleLpError("price estimate: probes are inconsistent with any nonnegative price");
    Vec c(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
    for (double v : c)
        if (!(v > 0.0)) throw DegenerateProbeError("price estimate: recovered price has a zero component");
    return PriceVector::normalized(c);
}

}  // namespace detail

struct PriceEstimate {
    PriceVector price;
    std::vector<Trade> probes;
    std::size_t queries = 0;
};

/// Marginal price from n feasible probe trades only. Probe i < n-1 tenders
/// asset i for the numeraire; the last probe tenders the numeraire for
/// asset 0. Each probe has input exactly `probe_size`.
inline PriceEstimate estimate_price_with_probes(CfmmOracle& oracle, double probe_size, double fee = 1.0,
                                                ProbeOptions probe = {}) {
    if (!(probe_size > 0.0) || !std::isfinite(probe_size)) throw ValidationError("probe size must be positive");
    const std::size_t n = oracle.n_assets();
    const std::size_t start = oracle.query_count();
    probe.max_input = probe_size;
    probe.seed_input = std::min(probe.seed_input, probe_size);
    probe.target_impact = std::numeric_limits<double>::infinity();

    PriceEstimate est;
    Matrix d(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t in = i + 1 < n ? i : n - 1;
        const std::size_t out = i + 1 < n ? n - 1 : 0;
        const ProbeResult p = find_probe_trade(oracle, in, out, fee, probe);
        if (p.input != probe_size) throw ConvergenceError("price estimate: could not extend a probe to the requested size");
        for (std::size_t j = 0; j < n; ++j) d(i, j) = p.trade[j];
        est.probes.push_back(p.trade);
    }
    est.price = detail::price_from_probe_matrix(d);
    est.queries = oracle.query_count() - start;
    return est;
}

inline PriceVector estimate_price_from_trades(CfmmOracle& oracle, double probe_size, double fee = 1.0) {
    return estimate_price_with_probes(oracle, probe_size, fee).price;
}

/// Constant-sum pools: for each asset j, withdraw j against a price-neutral
/// deposit of a neighbouring asset, doubling the withdrawal from 1 until the
/// pool refuses (reserves exhausted), then bisect the last interval down to
/// width epsilon.
namespace detail {

inline Vec constant_sum_search(CfmmOracle& oracle, const PriceVector& c, double epsilon, double fee) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (!(fee > 0.0) || fee > 1.0) throw ValidationError("fee parameter gamma must lie in (0, 1]");
    const std::size_t n = oracle.n_assets();
    if (c.size() != n) throw ValidationError("price length does not match the number of assets");
    Vec out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t in = (j + 1) % n;
        auto accepts = [&](double y) {
            Trade t{Vec(n, 0.0)};
            t.delta[in] = y * c[j] / c[in] / fee;
            t.delta[j] = -y;
            return oracle.check_trade(t);
        };
        double lo = 0.0, hi = 1.0;
        while (accepts(hi)) {
            lo = hi;
            hi *= 2.0;
            if (!std::isfinite(hi)) throw ConvergenceError("constant-sum search: withdrawal never rejected");
        }
        while (hi - lo > epsilon) {
            const double mid = lo + 0.5 * (hi - lo);
            if (mid <= lo || mid >= hi) break;
            if (accepts(mid))
                lo = mid;
            else
                hi = mid;
        }
        out[j] = lo + 0.5 * (hi - lo);
    }
    return out;
}

}  // namespace detail

inline Vec recover_reserves_constant_sum(CfmmOracle& oracle, double epsilon, double fee) {
    const PriceVector c = oracle.marginal_price();
    return detail::constant_sum_search(oracle, c, epsilon, fee);
}

}  // namespace cfmm
