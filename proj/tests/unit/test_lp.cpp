#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "cfmm_privacy/attack.hpp"
#include "cfmm_privacy/lp.hpp"
#include "cfmm_privacy/rng.hpp"

using namespace cfmm;

namespace {

// Reference optimum by enumerating every vertex: choose nv tight constraints
// among the rows and the bounds x_j >= 0, solve, keep the feasible best.
std::optional<double> brute_force_optimum(const lp::LinearProgram& prog) {
    const std::size_t nv = prog.objective.size();
    std::vector<Vec> rows = prog.rows;
    Vec rhs = prog.rhs;
    for (std::size_t j = 0; j < nv; ++j) {
        Vec e(nv, 0.0);
        e[j] = 1.0;
        rows.push_back(e);
        rhs.push_back(0.0);
    }
    const std::size_t m = rows.size();
    auto feasible = [&](const Vec& x) {
        for (double v : x)
            if (v < -1e-9) return false;
        for (std::size_t i = 0; i < prog.rows.size(); ++i) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < nv; ++j) lhs += prog.rows[i][j] * x[j];
            const double b = prog.rhs[i];
            if (prog.relations[i] == lp::Relation::LessEqual && lhs > b + 1e-9) return false;
            if (prog.relations[i] == lp::Relation::GreaterEqual && lhs < b - 1e-9) return false;
            if (prog.relations[i] == lp::Relation::Equal && std::abs(lhs - b) > 1e-9) return false;
        }
        return true;
    };
    std::optional<double> best;
    // Iterate over all nv-subsets of m constraints.
    std::vector<bool> mask(m, false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(nv), true);
    std::sort(mask.begin(), mask.end());
    do {
        Matrix a(nv, nv, 0.0);
        Vec b(nv);
        std::size_t r = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (!mask[i]) continue;
            for (std::size_t j = 0; j < nv; ++j) a(r, j) = rows[i][j];
            b[r++] = rhs[i];
        }
        Vec x;
        try {
            x = detail::solve_dense(a, b);
        } catch (const SingularSystemError&) {
            continue;
        }
        if (!feasible(x)) continue;
        double obj = 0.0;
        for (std::size_t j = 0; j < nv; ++j) obj += prog.objective[j] * x[j];
        if (!best || obj > *best) best = obj;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return best;
}

}  // namespace

TEST(Simplex, TextbookMaximization) {
    // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
    lp::LinearProgram p;
    p.objective = {3.0, 5.0};
    p.add({1.0, 0.0}, lp::Relation::LessEqual, 4.0);
    p.add({0.0, 2.0}, lp::Relation::LessEqual, 12.0);
    p.add({3.0, 2.0}, lp::Relation::LessEqual, 18.0);
    const auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(s.objective, 36.0, 1e-12);
    EXPECT_NEAR(s.x[0], 2.0, 1e-12);
    EXPECT_NEAR(s.x[1], 6.0, 1e-12);
}

TEST(Simplex, DetectsInfeasibility) {
    lp::LinearProgram p;
    p.objective = {1.0, 1.0};
    p.add({1.0, 1.0}, lp::Relation::LessEqual, 1.0);
    p.add({1.0, 1.0}, lp::Relation::GreaterEqual, 2.0);
    EXPECT_EQ(lp::solve(p).status, lp::Status::Infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
    lp::LinearProgram p;
    p.objective = {1.0, 0.0};
    p.add({1.0, -1.0}, lp::Relation::LessEqual, 1.0);
    EXPECT_EQ(lp::solve(p).status, lp::Status::Unbounded);
}

TEST(Simplex, NegativeRightHandSidesAndEqualities) {
    // min x + y  s.t. x - y = -1, x + 2y >= 4  -> (2/3, 5/3), value 7/3
    lp::LinearProgram p;
    p.objective = {-1.0, -1.0};
    p.add({1.0, -1.0}, lp::Relation::Equal, -1.0);
    p.add({1.0, 2.0}, lp::Relation::GreaterEqual, 4.0);
    const auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(-s.objective, 7.0 / 3.0, 1e-12);
}

TEST(Simplex, DegenerateVertexDoesNotCycle) {
    // Beale's classic cycling example; Bland's rule must terminate.
    lp::LinearProgram p;
    p.objective = {0.75, -150.0, 0.02, -6.0};
    p.add({0.25, -60.0, -0.04, 9.0}, lp::Relation::LessEqual, 0.0);
    p.add({0.5, -90.0, -0.02, 3.0}, lp::Relation::LessEqual, 0.0);
    p.add({0.0, 0.0, 1.0, 0.0}, lp::Relation::LessEqual, 1.0);
    const auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_NEAR(s.objective, 0.05, 1e-12);
}

TEST(Simplex, AgreesWithVertexEnumerationOnRandomPrograms) {
    Rng rng(31);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t nv = 2 + rng.index(2);
        const std::size_t m = 2 + rng.index(3);
        lp::LinearProgram p;
        for (std::size_t j = 0; j < nv; ++j) p.objective.push_back(rng.uniform(-1, 1));
        for (std::size_t i = 0; i < m; ++i) {
            Vec row(nv);
            for (double& v : row) v = std::round(rng.uniform(-5, 5) * 4) / 4;
            const auto rel = static_cast<lp::Relation>(rng.index(3));
            p.add(row, rel, std::round(rng.uniform(-5, 10) * 4) / 4);
        }
        for (std::size_t j = 0; j < nv; ++j) {  // box keeps the program bounded
            Vec e(nv, 0.0);
            e[j] = 1.0;
            p.add(e, lp::Relation::LessEqual, 10.0);
        }
        const auto expect = brute_force_optimum(p);
        const auto got = lp::solve(p);
        if (!expect) {
            EXPECT_EQ(got.status, lp::Status::Infeasible) << "trial " << trial;
            ++infeasible;
        } else {
            ASSERT_EQ(got.status, lp::Status::Optimal) << "trial " << trial;
            EXPECT_NEAR(got.objective, *expect, 1e-9 * std::max(1.0, std::abs(*expect))) << "trial " << trial;
            ++optimal;
        }
    }
    EXPECT_GT(optimal, 50);
    EXPECT_GT(infeasible, 10);
}

TEST(PriceLp, RecoversPriceFromExactSupportingTrades) {
    // Probes that are price-neutral at c up to a tiny positive slack.
    const Vec c{2.0, 0.5, 1.0};
    Matrix d(3, 3, 0.0);
    const double rows[3][3] = {{1.0, 0.0, -2.0 + 1e-9}, {0.0, 1.0, -0.5 + 1e-9}, {-1.0, 0.0, 2.0 + 1e-9}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d(i, j) = rows[i][j];
    const PriceVector p = detail::price_from_probe_matrix(d);
    // The opposing pair pins c1 / c3; the middle probe only bounds c2 from below.
    EXPECT_NEAR(p[0], c[0], 1e-6);
    EXPECT_GE(p[1], c[1] - 1e-6);
    EXPECT_EQ(p[2], 1.0);
}

TEST(PriceLp, DependentProbesAreDegenerate) {
    Matrix d(2, 2, 0.0);
    d(0, 0) = 1.0;
    d(0, 1) = -2.0;
    d(1, 0) = 2.0;
    d(1, 1) = -4.0;
    EXPECT_THROW(detail::price_from_probe_matrix(d), DegenerateProbeError);
}

TEST(PriceLp, InconsistentProbesAreInfeasible) {
    // Both probes withdraw more value than they deposit at every price.
    Matrix d(2, 2, 0.0);
    d(0, 0) = 1.0;
    d(0, 1) = -3.0;
    d(1, 0) = -3.0;
    d(1, 1) = 1.0;
    EXPECT_THROW(detail::price_from_probe_matrix(d), InfeasibleLpError);
}
