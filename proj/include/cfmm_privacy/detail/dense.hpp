// Small dense linear algebra: just enough for Newton steps on (n+1)-sized
// systems and rank checks on probe matrices.
#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "cfmm_privacy/errors.hpp"

namespace cfmm {

using Vec = std::vector<double>;

/// Row-major square-or-rectangular matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws SingularSystemError when a pivot vanishes relative to the row scale.
inline Vec solve_dense(Matrix a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw ValidationError("solve_dense: shape mismatch");

    Vec scale(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) scale[r] = std::max(scale[r], std::abs(a(r, c)));
        if (scale[r] == 0.0) throw SingularSystemError("solve_dense: zero row");
    }

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k)) / scale[k];
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(a(r, k)) / scale[r];
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best <= 1e-14) throw SingularSystemError("solve_dense: matrix is singular to working precision");
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
            std::swap(b[k], b[piv]);
            std::swap(scale[k], scale[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a(r, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
            b[r] -= f * b[k];
        }
    }

    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
        x[i] = s / a(i, i);
    }
    return x;
}

/// |det(A)| / prod(row norms): 0 for dependent rows, 1 for orthogonal rows.
inline double normalized_volume(Matrix a) {
    const std::size_t n = a.rows();
    double vol = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double nr = norm2(a.row(r));
        if (nr == 0.0) return 0.0;
        for (std::size_t c = 0; c < n; ++c) a(r, c) /= nr;
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k)
            for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
        vol *= std::abs(a(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a(r, k) / a(k, k);
            for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
        }
    }
    return vol;
}

}  // namespace detail
}  // namespace cfmm
