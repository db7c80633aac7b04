// Dense two-phase simplex for the small linear programs that come up when
// turning feasibility probes into a price estimate (a handful of variables
// and constraints). Bland's rule throughout, so it cannot cycle.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cfmm_privacy/detail/dense.hpp"
#include "cfmm_privacy/errors.hpp"

namespace cfmm::lp {

enum class Relation { LessEqual, GreaterEqual, Equal };

/// maximize objective . x  subject to  rows[i] . x (rel[i]) rhs[i],  x >= 0.
struct LinearProgram {
    std::vector<Vec> rows;
    std::vector<Relation> relations;
    Vec rhs;
    Vec objective;

    void add(Vec row, Relation rel, double b) {
        rows.push_back(std::move(row));
        relations.push_back(rel);
        rhs.push_back(b);
    }
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
    Status status = Status::Infeasible;
    Vec x;
    double objective = 0.0;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, n_); }
    double& cost(std::size_t c) { return at(m_, c); }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t c = 0; c <= n_; ++c) at(pr, c) /= p;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
        }
        basis_[pr] = pc;
    }

    /// Minimizes the cost row over columns [0, active). Returns false if unbounded.
    /// Pivot elements must exceed `pivot_tol`; tinier ones wreck the tableau.
    bool run(std::size_t active, double eps, double pivot_tol) {
        for (std::size_t iter = 0; iter < 10000; ++iter) {
            std::size_t enter = active;
            for (std::size_t c = 0; c < active; ++c) {
                if (cost(c) < -eps) {
                    enter = c;
                    break;
                }
            }
            if (enter == active) return true;
            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double a = at(r, enter);
                if (a > pivot_tol) {
                    const double ratio = rhs(r) / a;
                    if (ratio < best - eps || (std::abs(ratio - best) <= eps && leave < m_ && basis_[r] < basis_[leave])) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
        throw ConvergenceError("simplex: iteration limit reached");
    }

private:
    std::size_t m_, n_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
};

}  // namespace detail

inline Solution solve(const LinearProgram& lp, double eps = 1e-12) {
    const std::size_t m = lp.rows.size();
    const std::size_t nv = lp.objective.size();
    if (lp.relations.size() != m || lp.rhs.size() != m) throw ValidationError("linear program: inconsistent row data");
    for (const auto& row : lp.rows)
        if (row.size() != nv) throw ValidationError("linear program: row length differs from objective length");

    // Column layout: [structural | slack/surplus | artificial | rhs].
    std::vector<Vec> a = lp.rows;
    Vec b = lp.rhs;
    std::vector<Relation> rel = lp.relations;
    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            for (double& v : a[i]) v = -v;
            b[i] = -b[i];
            if (rel[i] == Relation::LessEqual)
                rel[i] = Relation::GreaterEqual;
            else if (rel[i] == Relation::GreaterEqual)
                rel[i] = Relation::LessEqual;
        }
    }
    std::size_t n_slack = 0, n_art = 0;
    for (Relation r : rel) {
        if (r != Relation::Equal) ++n_slack;
        if (r != Relation::LessEqual) ++n_art;
    }
    const std::size_t art0 = nv + n_slack;
    const std::size_t total = art0 + n_art;

    detail::Tableau tab(m, total);
    std::size_t s = nv, art = art0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < nv; ++j) tab.at(i, j) = a[i][j];
        tab.rhs(i) = b[i];
        if (rel[i] == Relation::LessEqual) {
            tab.at(i, s) = 1.0;
            tab.basis()[i] = s++;
        } else {
            if (rel[i] == Relation::GreaterEqual) tab.at(i, s++) = -1.0;
            tab.at(i, art) = 1.0;
            tab.basis()[i] = art++;
        }
    }

    double scale = 1.0;
    for (std::size_t i = 0; i < m; ++i)
        for (double v : a[i]) scale = std::max(scale, std::abs(v));
    const double tol = eps * scale;
    const double pivot_tol = std::max(tol, 1e-9 * scale);

    // Phase 1: minimize the sum of artificials.
    if (n_art > 0) {
        for (std::size_t c = 0; c <= total; ++c) tab.cost(c) = 0.0;
        for (std::size_t c = art0; c < total; ++c) tab.cost(c) = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis()[i] >= art0) {
                for (std::size_t c = 0; c <= total; ++c) tab.cost(c) -= tab.at(i, c);
            }
        }
        tab.run(total, tol, pivot_tol);
        double b_scale = 1.0;
        for (double v : b) b_scale = std::max(b_scale, v);
        if (-tab.cost(total) > 1e-9 * b_scale) return {Status::Infeasible, {}, 0.0};
        // Drive remaining artificials out of the basis on the largest entry.
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis()[i] < art0) continue;
            std::size_t best = art0;
            for (std::size_t c = 0; c < art0; ++c)
                if (std::abs(tab.at(i, c)) > pivot_tol && (best == art0 || std::abs(tab.at(i, c)) > std::abs(tab.at(i, best))))
                    best = c;
            if (best < art0) tab.pivot(i, best);
        }
    }

    // Phase 2 over structural + slack columns; artificials stay out.
    for (std::size_t c = 0; c <= total; ++c) tab.cost(c) = 0.0;
    for (std::size_t j = 0; j < nv; ++j) tab.cost(j) = -lp.objective[j];
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t bcol = tab.basis()[i];
        const double cb = tab.cost(bcol);
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= total; ++c) tab.cost(c) -= cb * tab.at(i, c);
    }
    for (std::size_t c = art0; c < total; ++c) tab.cost(c) = 0.0;
    if (!tab.run(art0, tol, pivot_tol)) return {Status::Unbounded, {}, 0.0};

    Solution sol;
    sol.status = Status::Optimal;
    sol.x.assign(nv, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis()[i] < nv) sol.x[tab.basis()[i]] = tab.rhs(i);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < nv; ++j) sol.objective += lp.objective[j] * sol.x[j];
    return sol;
}

}  // namespace cfmm::lp
