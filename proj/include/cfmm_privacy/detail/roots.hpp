// Bracketing root finders.
#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>

#include "cfmm_privacy/errors.hpp"

namespace cfmm::detail {

struct RootResult {
    double x;       // best abscissa found
    double fx;      // f(x)
    double lo, hi;  // final bracket
    std::size_t iterations;
};

/// Bisection on a bracket [lo, hi] with f(lo) and f(hi) of opposite sign.
/// f may return +-inf to encode "outside the domain" on one side.
/// Stops on an exact zero, when the bracket is narrower than
/// rel_width * max(|lo|, |hi|), or when the midpoint is no longer
/// representable between the endpoints.
template <class F>
RootResult bisect(F&& f, double lo, double hi, double f_lo, double f_hi, double rel_width = 0.0,
                  std::size_t max_iter = 2000) {
    if (std::signbit(f_lo) == std::signbit(f_hi) && f_lo != 0.0 && f_hi != 0.0)
        throw BracketError("bisect: endpoints do not bracket a sign change");
    if (f_lo == 0.0) return {lo, f_lo, lo, hi, 0};
    if (f_hi == 0.0) return {hi, f_hi, lo, hi, 0};

    const bool lo_negative = f_lo < 0.0;
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (hi - lo <= rel_width * std::max(std::abs(lo), std::abs(hi))) break;
        const double fm = f(mid);
        if (fm == 0.0) return {mid, fm, mid, mid, it + 1};
        if ((fm < 0.0) == lo_negative) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    if (std::abs(f_lo) <= std::abs(f_hi)) return {lo, f_lo, lo, hi, it};
    return {hi, f_hi, lo, hi, it};
}

/// Bisection on a boolean predicate that holds at `inside` and fails at
/// `outside`. Returns the pair narrowed to adjacent-representable width.
template <class Pred>
std::pair<double, double> bisect_predicate(Pred&& pred, double inside, double outside,
                                           std::size_t max_iter = 2000) {
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double mid = inside + 0.5 * (outside - inside);
        if (mid == inside || mid == outside) break;
        if (pred(mid))
            inside = mid;
        else
            outside = mid;
    }
    return {inside, outside};
}

/// Neville evaluation of the interpolating polynomial through (xs, ys) at x.
template <class Xs, class Ys>
double neville(const Xs& xs, const Ys& ys, double x) {
    const std::size_t n = std::min<std::size_t>(xs.size(), 16);
    double p[16];
    for (std::size_t i = 0; i < n; ++i) p[i] = ys[i];
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            p[i] = ((x - xs[i + m]) * p[i] + (xs[i] - x) * p[i + 1]) / (xs[i] - xs[i + m]);
    return p[0];
}

}  // namespace cfmm::detail
