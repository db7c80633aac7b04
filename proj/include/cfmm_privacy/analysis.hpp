// Numerical checks of the two geometric facts behind unique recovery:
// the price is constant along rays through the reserves (homogeneous psi),
// and a trade feasible at R is too cheap at k R for k > 1 and infeasible
// for k < 1. Both are sampled, so a pass is evidence rather than proof.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cfmm_privacy/attack.hpp"
#include "cfmm_privacy/core.hpp"

namespace cfmm {

enum class GeometryProperty { RayInvariance, ScaleSignPattern };

inline const char* property_name(GeometryProperty p) {
    return p == GeometryProperty::RayInvariance ? "RayInvariance" : "ScaleSignPattern";
}

struct GeometryReport {
    std::string spec_id;
    GeometryProperty property = GeometryProperty::RayInvariance;
    std::size_t samples = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// `count` points spaced logarithmically over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ValidationError("log_grid: need 0 < lo <= hi and count > 0");
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline constexpr double kRayTolerance = 1e-9;

/// Largest relative change of the numeraire-normalized price between R and
/// k R over the given scales.
inline GeometryReport verify_ray_invariance(const TradingFunctionSpec& spec, std::span<const double> r,
                                            std::span<const double> scales) {
    for (double k : scales)
        if (!(k > 0.0)) throw ValidationError("ray scales must be positive");
    const PriceVector base = marginal_price(spec, r);
    GeometryReport rep{spec.id(), GeometryProperty::RayInvariance, scales.size(), 0.0, kRayTolerance, false};
    Vec kr(r.size());
    for (double k : scales) {
        for (std::size_t i = 0; i < r.size(); ++i) kr[i] = k * r[i];
        const PriceVector p = marginal_price(spec, kr);
        for (std::size_t i = 0; i < r.size(); ++i)
            rep.max_violation = std::max(rep.max_violation, std::abs(p[i] - base[i]) / base[i]);
    }
    rep.pass = rep.max_violation <= rep.tolerance;
    return rep;
}

/// Signs of g(k) = psi(k R + D) - psi(k R) over the grid; points where
/// k R + D leaves the positive orthant count as negative. Every point with
/// k < 1 must be strictly negative and every k > 1 strictly positive; a grid
/// point at exactly k = 1 must satisfy |g(1)| <= tol_feas.
///
/// Each wrong-signed point contributes |g| / psi(k R) (floored at the
/// smallest positive double so a wrong zero still registers); the tolerance
/// is zero.
inline GeometryReport scan_scale_sign(const TradingFunctionSpec& spec, std::span<const double> r, const Trade& trade,
                                      std::span<const double> grid) {
    detail::require_size(spec, r.size());
    detail::require_size(spec, trade.size());
    GeometryReport rep{spec.id(), GeometryProperty::ScaleSignPattern, grid.size(), 0.0, 0.0, false};
    Vec kr(r.size());
    for (double k : grid) {
        if (!(k > 0.0)) throw ValidationError("scale grid must be positive");
        for (std::size_t i = 0; i < r.size(); ++i) kr[i] = k * r[i];
        const double g = detail::signed_change(spec, kr, trade.delta);
        const double psi = std::abs(eval_psi(spec, kr));
        double violation = 0.0;
        if (k == 1.0) {
            if (!(std::abs(g) <= feasibility_tolerance(spec, kr))) violation = std::abs(g) / psi;
        } else {
            const bool ok = k < 1.0 ? g < 0.0 : g > 0.0;
            if (!ok)
                violation = std::isfinite(g) ? std::max(std::abs(g) / psi, std::numeric_limits<double>::min())
                                             : std::numeric_limits<double>::infinity();
        }
        rep.max_violation = std::max(rep.max_violation, violation);
    }
    rep.pass = rep.max_violation <= rep.tolerance;
    return rep;
}

inline std::vector<double> default_scale_grid() { return log_grid(0.1, 10.0, 50); }

}  // namespace cfmm
