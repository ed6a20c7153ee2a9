#pragma once

// Brute-force reference implementations used by the tests. They share no code
// with the library beyond the data types.

#include "vcei/common.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace vcei::oracle {

inline double sek(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v, double lengthscale) {
    double d2 = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) d2 += (u(k) - v(k)) * (u(k) - v(k));
    return std::exp(-d2 / (2.0 * lengthscale * lengthscale));
}

/// Double-loop weighted V-statistic between two weighted sample sets.
inline double mmd2(const Matrix& a, const Vector& wa, const Matrix& b, const Vector& wb, double lengthscale) {
    double aa = 0.0, ab = 0.0, bb = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.rows(); ++j) aa += wa(i) * wa(j) * sek(a.row(i), a.row(j), lengthscale);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j) ab += wa(i) * wb(j) * sek(a.row(i), b.row(j), lengthscale);
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j) bb += wb(i) * wb(j) * sek(b.row(i), b.row(j), lengthscale);
    return aa - 2.0 * ab + bb;
}

inline Vector uniform(Eigen::Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

/// Calls `visit` on every point of the simplex grid {k * step : sum = 1} in
/// dimension `dim`.
inline void for_each_simplex_point(int dim, int steps, const std::function<void(const Vector&)>& visit) {
    Vector w(dim);
    std::vector<int> counts(static_cast<std::size_t>(dim), 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == dim - 1) {
            counts[static_cast<std::size_t>(i)] = left;
            for (int k = 0; k < dim; ++k) w(k) = counts[static_cast<std::size_t>(k)] / static_cast<double>(steps);
            visit(w);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[static_cast<std::size_t>(i)] = c;
            rec(i + 1, left - c);
        }
    };
    rec(0, steps);
}

/// max over the simplex grid of the weighted-vs-uniform MMD^2 of `points`.
inline double simplex_grid_max(const Matrix& points, double lengthscale, int steps) {
    const Eigen::Index n = points.rows();
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = sek(points.row(i), points.row(j), lengthscale);
    const Vector u = uniform(n);
    double best = -1.0;
    for_each_simplex_point(static_cast<int>(n), steps, [&](const Vector& w) {
        const Vector d = w - u;
        best = std::max(best, d.dot(k * d));
    });
    return best;
}

/// GP posterior mean with per-sample noise, by a dense LU solve.
inline Matrix gp_mean(const Matrix& x, const Matrix& y, const Vector& noise, const Matrix& query, double lengthscale) {
    const Eigen::Index n = x.rows();
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = sek(x.row(i), x.row(j), lengthscale);
    k.diagonal() += noise;
    Matrix ks(query.rows(), n);
    for (Eigen::Index i = 0; i < query.rows(); ++i)
        for (Eigen::Index j = 0; j < n; ++j) ks(i, j) = sek(query.row(i), x.row(j), lengthscale);
    return ks * k.fullPivLu().solve(y);
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
    return m;
}

}  // namespace vcei::oracle
