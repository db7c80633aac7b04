// Trading functions, pool state, trade validation and execution.
//
// Every trading function here is written in its concave, increasing form
// (the constant-product pool is the geometric mean, not the raw product).
// Domains are restricted to strictly positive reserves.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cfmm_privacy/detail/dense.hpp"
#include "cfmm_privacy/detail/roots.hpp"
#include "cfmm_privacy/errors.hpp"

namespace cfmm {

enum class Family { ConstantProduct, ConstantMean, ConstantSum, CurveLike };

inline const char* family_tag(Family f) {
    switch (f) {
        case Family::ConstantProduct: return "cp";
        case Family::ConstantMean: return "cm";
        case Family::ConstantSum: return "cs";
        case Family::CurveLike: return "curve";
    }
    return "?";
}

/// Which function psi the pool keeps constant.
///
/// ConstantProduct: (prod R_i)^(1/n), raised to `degree`.
/// ConstantMean:    prod R_i^w_i with sum w = 1, raised to `degree`.
/// ConstantSum:     (sum R_i), raised to `degree`.
/// CurveLike:       alpha * sum R_i - beta * sum 1/R_i; not homogeneous.
struct TradingFunctionSpec {
    Family family = Family::ConstantProduct;
    std::size_t n_assets = 2;
    Vec weights;                   // ConstantMean only
    double alpha = 0.0;            // CurveLike only
    double beta = 0.0;             // CurveLike only
    std::optional<double> degree;  // homogeneity degree p; empty for CurveLike

    static TradingFunctionSpec constant_product(std::size_t n = 2, double p = 1.0) {
        TradingFunctionSpec s;
        s.family = Family::ConstantProduct;
        s.n_assets = n;
        s.degree = p;
        s.validate();
        return s;
    }

    static TradingFunctionSpec constant_mean(Vec w, double p = 1.0) {
        TradingFunctionSpec s;
        s.family = Family::ConstantMean;
        s.n_assets = w.size();
        s.weights = std::move(w);
        s.degree = p;
        s.validate();
        return s;
    }

    static TradingFunctionSpec constant_sum(std::size_t n = 2, double p = 1.0) {
        TradingFunctionSpec s;
        s.family = Family::ConstantSum;
        s.n_assets = n;
        s.degree = p;
        s.validate();
        return s;
    }

    static TradingFunctionSpec curve_like(std::size_t n, double alpha, double beta) {
        TradingFunctionSpec s;
        s.family = Family::CurveLike;
        s.n_assets = n;
        s.alpha = alpha;
        s.beta = beta;
        s.validate();
        return s;
    }

    bool homogeneous() const { return degree.has_value(); }

    /// Per-asset exponent of the geometric-mean families.
    double weight(std::size_t i) const {
        return family == Family::ConstantMean ? weights[i] : 1.0 / static_cast<double>(n_assets);
    }

    void validate() const {
        if (n_assets < 2) throw ValidationError("trading function needs at least two assets");
        switch (family) {
            case Family::ConstantMean: {
                if (weights.size() != n_assets) throw ValidationError("constant-mean weights must have one entry per asset");
                double sum = 0.0;
                for (double w : weights) {
                    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("constant-mean weights must be strictly positive");
                    sum += w;
                }
                if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("constant-mean weights must sum to 1");
                break;
            }
            case Family::CurveLike:
                if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
                    throw ValidationError("curve-like parameters alpha and beta must be positive");
                if (degree) throw ValidationError("curve-like trading function has no homogeneity degree");
                break;
            default:
                if (!weights.empty()) throw ValidationError("weights are only meaningful for constant-mean pools");
                break;
        }
        if (family != Family::CurveLike) {
            if (!degree || !(*degree > 0.0) || !std::isfinite(*degree))
                throw ValidationError("homogeneity degree must be a positive finite number");
        }
    }

    /// Compact descriptor, e.g. "cp", "cm:0.8,0.2", "curve:1,1", "cp^2".
    std::string id() const {
        std::ostringstream os;
        os.precision(12);
        os << family_tag(family);
        if (family == Family::ConstantMean) {
            os << ':';
            for (std::size_t i = 0; i < weights.size(); ++i) os << (i ? "," : "") << weights[i];
        } else if (family == Family::CurveLike) {
            os << ':' << alpha << ',' << beta;
        }
        if (degree && *degree != 1.0) os << '^' << *degree;
        return os.str();
    }

    friend bool operator==(const TradingFunctionSpec&, const TradingFunctionSpec&) = default;
};

/// Signed trade vector: positive entries are tendered to the pool,
/// negative entries are withdrawn from it.
struct Trade {
    Vec delta;

    std::size_t size() const { return delta.size(); }
    double operator[](std::size_t i) const { return delta[i]; }

    bool is_zero() const {
        return std::all_of(delta.begin(), delta.end(), [](double d) { return d == 0.0; });
    }
    bool is_finite() const {
        return std::all_of(delta.begin(), delta.end(), [](double d) { return std::isfinite(d); });
    }

    friend bool operator==(const Trade&, const Trade&) = default;
};

/// Marginal price up to scale, normalized so the last asset is the numeraire.
struct PriceVector {
    Vec components;

    std::size_t size() const { return components.size(); }
    double operator[](std::size_t i) const { return components[i]; }

    /// Rescales any strictly positive direction to numeraire form.
    static PriceVector normalized(std::span<const double> direction) {
        if (direction.empty()) throw ValidationError("price vector is empty");
        const double last = direction.back();
        PriceVector p;
        p.components.reserve(direction.size());
        for (double v : direction) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("price components must be strictly positive");
            p.components.push_back(v / last);
        }
        p.components.back() = 1.0;
        return p;
    }

    friend bool operator==(const PriceVector&, const PriceVector&) = default;
};

struct PoolState {
    TradingFunctionSpec spec;
    Vec reserves;
    double fee = 1.0;  // gamma; 1 means no fee

    void validate() const {
        spec.validate();
        if (reserves.size() != spec.n_assets) throw ValidationError("reserve vector length does not match the trading function");
        for (double r : reserves)
            if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("reserves must be strictly positive and finite");
        if (!(fee > 0.0) || fee > 1.0) throw ValidationError("fee parameter gamma must lie in (0, 1]");
    }

    friend bool operator==(const PoolState&, const PoolState&) = default;
};

namespace detail {

inline void require_positive(std::span<const double> r) {
    for (double v : r)
        if (!(v > 0.0)) throw DomainError("trading function evaluated outside R > 0");
}

inline void require_size(const TradingFunctionSpec& spec, std::size_t n) {
    if (n != spec.n_assets) throw ValidationError("vector length does not match the number of assets");
}

}  // namespace detail

inline double eval_psi(const TradingFunctionSpec& spec, std::span<const double> r) {
    detail::require_size(spec, r.size());
    detail::require_positive(r);
    switch (spec.family) {
        case Family::ConstantProduct:
        case Family::ConstantMean: {
            double g = 1.0;
            for (std::size_t i = 0; i < r.size(); ++i) g *= std::pow(r[i], spec.weight(i));
            return *spec.degree == 1.0 ? g : std::pow(g, *spec.degree);
        }
        case Family::ConstantSum: {
            double s = 0.0;
            for (double v : r) s += v;
            return *spec.degree == 1.0 ? s : std::pow(s, *spec.degree);
        }
        case Family::CurveLike: {
            double lin = 0.0, inv = 0.0;
            for (double v : r) {
                lin += v;
                inv += 1.0 / v;
            }
            return spec.alpha * lin - spec.beta * inv;
        }
    }
    return 0.0;
}

inline Vec grad_psi(const TradingFunctionSpec& spec, std::span<const double> r) {
    detail::require_size(spec, r.size());
    detail::require_positive(r);
    Vec g(r.size());
    switch (spec.family) {
        case Family::ConstantProduct:
        case Family::ConstantMean: {
            const double scale = *spec.degree * eval_psi(spec, r);
            for (std::size_t i = 0; i < r.size(); ++i) g[i] = scale * spec.weight(i) / r[i];
            break;
        }
        case Family::ConstantSum: {
            double s = 0.0;
            for (double v : r) s += v;
            const double p = *spec.degree;
            std::fill(g.begin(), g.end(), p == 1.0 ? 1.0 : p * std::pow(s, p - 1.0));
            break;
        }
        case Family::CurveLike:
            for (std::size_t i = 0; i < r.size(); ++i) g[i] = spec.alpha + spec.beta / (r[i] * r[i]);
            break;
    }
    return g;
}

/// Analytic Hessian; used by the Newton solvers.
inline Matrix hess_psi(const TradingFunctionSpec& spec, std::span<const double> r) {
    detail::require_size(spec, r.size());
    detail::require_positive(r);
    const std::size_t n = r.size();
    Matrix h(n, n, 0.0);
    switch (spec.family) {
        case Family::ConstantProduct:
        case Family::ConstantMean: {
            const double p = *spec.degree;
            const double scale = p * eval_psi(spec, r);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    h(i, j) = scale * p * spec.weight(i) * spec.weight(j) / (r[i] * r[j]);
                }
                h(i, i) -= scale * spec.weight(i) / (r[i] * r[i]);
            }
            break;
        }
        case Family::ConstantSum: {
            const double p = *spec.degree;
            if (p != 1.0) {
                double s = 0.0;
                for (double v : r) s += v;
                const double v = p * (p - 1.0) * std::pow(s, p - 2.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) h(i, j) = v;
            }
            break;
        }
        case Family::CurveLike:
            for (std::size_t i = 0; i < n; ++i) h(i, i) = -2.0 * spec.beta / (r[i] * r[i] * r[i]);
            break;
    }
    return h;
}

/// psi(R + d) - psi(R), evaluated without forming the two large values and
/// subtracting them. Requires R > 0 and R + d > 0.
inline double psi_change(const TradingFunctionSpec& spec, std::span<const double> r, std::span<const double> d) {
    detail::require_size(spec, r.size());
    detail::require_size(spec, d.size());
    detail::require_positive(r);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!(r[i] + d[i] > 0.0)) throw DomainError("trading function evaluated outside R > 0");
    switch (spec.family) {
        case Family::ConstantProduct:
        case Family::ConstantMean: {
            double log_ratio = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) log_ratio += spec.weight(i) * std::log1p(d[i] / r[i]);
            return eval_psi(spec, r) * std::expm1(*spec.degree * log_ratio);
        }
        case Family::ConstantSum: {
            double s = 0.0, ds = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                s += r[i];
                ds += d[i];
            }
            const double p = *spec.degree;
            if (p == 1.0) return ds;
            return std::pow(s, p) * std::expm1(p * std::log1p(ds / s));
        }
        case Family::CurveLike: {
            double lin = 0.0, inv = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                lin += d[i];
                inv += d[i] / (r[i] * (r[i] + d[i]));
            }
            return spec.alpha * lin + spec.beta * inv;
        }
    }
    return 0.0;
}

/// Acceptance band for psi equality: 1e-9 * max(1, |psi(R)|).
inline double feasibility_tolerance(const TradingFunctionSpec& spec, std::span<const double> r) {
    return 1e-9 * std::max(1.0, std::abs(eval_psi(spec, r)));
}

/// gamma * positive part - negative part.
inline Vec fee_adjusted(std::span<const double> delta, double gamma) {
    Vec a(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) a[i] = delta[i] > 0.0 ? gamma * delta[i] : delta[i];
    return a;
}

inline PriceVector marginal_price(const TradingFunctionSpec& spec, std::span<const double> r) {
    const Vec g = grad_psi(spec, r);
    return PriceVector::normalized(g);
}

inline PriceVector marginal_price(const PoolState& state) { return marginal_price(state.spec, state.reserves); }

/// Signed residual psi(R + gamma*D+ - D-) - psi(R); nullopt when the trade
/// leaves the strictly positive domain.
inline std::optional<double> trade_residual(const PoolState& state, const Trade& trade) {
    if (trade.size() != state.reserves.size() || !trade.is_finite()) return std::nullopt;
    const Vec adj = fee_adjusted(trade.delta, state.fee);
    for (std::size_t i = 0; i < adj.size(); ++i) {
        if (state.reserves[i] + trade[i] < 0.0) return std::nullopt;
        if (!(state.reserves[i] + adj[i] > 0.0)) return std::nullopt;
    }
    return psi_change(state.spec, state.reserves, adj);
}

inline bool is_feasible(const PoolState& state, const Trade& trade) {
    const auto res = trade_residual(state, trade);
    if (!res) return false;
    return std::abs(*res) <= feasibility_tolerance(state.spec, state.reserves);
}

inline PoolState execute_trade(const PoolState& state, const Trade& trade) {
    if (!is_feasible(state, trade)) throw RejectedTrade("trade rejected: trading function not preserved or reserves exhausted");
    PoolState next = state;
    for (std::size_t i = 0; i < next.reserves.size(); ++i) next.reserves[i] += trade[i];
    return next;
}

namespace detail {

inline void check_pair(const PoolState& state, std::size_t in, std::size_t out) {
    const std::size_t n = state.reserves.size();
    if (in >= n || out >= n) throw ValidationError("asset index out of range");
    if (in == out) throw ValidationError("input and output asset must differ");
}

inline Trade pair_trade(std::size_t n, std::size_t in, double x, std::size_t out, double y) {
    Trade t{Vec(n, 0.0)};
    t.delta[in] = x;
    t.delta[out] = -y;
    return t;
}

}  // namespace detail

/// Output side of a single-in/single-out trade: the Trade with
/// delta[in] = input_amount and delta[out] < 0 that keeps psi constant.
/// Solved by bisection on the output amount over [0, R_out).
inline Trade quote_output(const PoolState& state, std::size_t input_asset, double input_amount, std::size_t output_asset) {
    detail::check_pair(state, input_asset, output_asset);
    if (!(input_amount > 0.0) || !std::isfinite(input_amount)) throw ValidationError("input amount must be positive");
    const std::size_t n = state.reserves.size();
    const double r_out = state.reserves[output_asset];

    auto residual = [&](double y) {
        Vec d(n, 0.0);
        d[input_asset] = state.fee * input_amount;
        d[output_asset] = -y;
        return psi_change(state.spec, state.reserves, d);
    };

    const double lo = 0.0;
    const double hi = std::nextafter(r_out, 0.0);
    const double f_lo = residual(lo);
    const double f_hi = residual(hi);
    if (f_hi > 0.0) throw NoSolutionError("quote_output: required output exceeds the pool's reserves");

    const auto root = detail::bisect(residual, lo, hi, f_lo, f_hi);
    Trade t = detail::pair_trade(n, input_asset, input_amount, output_asset, root.x);
    if (!is_feasible(state, t)) throw NoSolutionError("quote_output: no feasible output amount");
    return t;
}

/// Input side for a requested output amount; the inverse of quote_output.
inline Trade quote_input(const PoolState& state, std::size_t input_asset, std::size_t output_asset, double output_amount) {
    detail::check_pair(state, input_asset, output_asset);
    const double r_out = state.reserves[output_asset];
    if (!(output_amount > 0.0) || !(output_amount < r_out)) throw NoSolutionError("quote_input: output must lie in (0, R_out)");
    const std::size_t n = state.reserves.size();

    auto residual = [&](double x) {
        Vec d(n, 0.0);
        d[input_asset] = state.fee * x;
        d[output_asset] = -output_amount;
        return psi_change(state.spec, state.reserves, d);
    };

    const PriceVector c = marginal_price(state);
    double hi = output_amount * c[output_asset] / c[input_asset] / state.fee;
    double f_hi = residual(hi);
    for (int i = 0; f_hi <= 0.0; ++i) {
        if (i > 2000 || !std::isfinite(hi)) throw NoSolutionError("quote_input: no input amount reaches the requested output");
        hi *= 2.0;
        f_hi = residual(hi);
    }
    const auto root = detail::bisect(residual, 0.0, hi, residual(0.0), f_hi);
    Trade t = detail::pair_trade(n, input_asset, root.x, output_asset, output_amount);
    if (!is_feasible(state, t)) throw NoSolutionError("quote_input: no feasible input amount");
    return t;
}

}  // namespace cfmm
