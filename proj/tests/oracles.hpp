#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance run. Each one recomputes a result from its definition without
// touching the production code path.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "fispca/fis.hpp"
#include "fispca/matrix.hpp"

namespace fispca::oracle {

// Straight from the definition: Gaussian degrees multiplied, then a weighted average.
inline double brute_force(const TSModel& m, const std::vector<double>& x) {
    double num = 0.0, den = 0.0;
    for (const auto& r : m.rules()) {
        double w = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - r.antecedents[i].center;
            w *= std::exp(-(d * d) / (2.0 * r.antecedents[i].width * r.antecedents[i].width));
        }
        double f = r.consequent[0];
        for (std::size_t i = 0; i < x.size(); ++i) f += r.consequent[i + 1] * x[i];
        num += w * f;
        den += w;
    }
    return num / den;
}

struct EigenPair {
    double value;
    std::vector<double> vector;
};

// Roots of the characteristic polynomial in closed form, descending, with
// eigenvectors from the null space of (A - lambda I).
inline std::vector<EigenPair> characteristic_eigen(const Matrix& a) {
    std::vector<EigenPair> out;
    if (a.rows() == 1) return {{a(0, 0), {1.0}}};
    if (a.rows() == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const double disc = std::sqrt(tr * tr / 4.0 - det);
        for (double l : {tr / 2.0 + disc, tr / 2.0 - disc}) {
            // Rows of A - lambda I are orthogonal to the eigenvector; use the longer one.
            const std::array<double, 2> r0 = {a(0, 0) - l, a(0, 1)};
            const std::array<double, 2> r1 = {a(1, 0), a(1, 1) - l};
            const auto& r = std::hypot(r0[0], r0[1]) >= std::hypot(r1[0], r1[1]) ? r0 : r1;
            std::vector<double> v = {-r[1], r[0]};
            const double n = std::hypot(v[0], v[1]);
            out.push_back({l, {v[0] / n, v[1] / n}});
        }
        return out;
    }
    // 3x3: trigonometric solution of det(lambda I - A) = 0.
    const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) + (a(2, 2) - q) * (a(2, 2) - q) +
                      2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Matrix b(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) b(i, j) = (a(i, j) - (i == j ? q : 0.0)) / p;
    const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                        b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                        b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    const double phi = std::acos(std::clamp(detb / 2.0, -1.0, 1.0)) / 3.0;
    const double l1 = q + 2.0 * p * std::cos(phi);
    const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double l2 = 3.0 * q - l1 - l3;
    for (double l : {l1, l2, l3}) {
        std::array<std::array<double, 3>, 3> r{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r[i][j] = a(i, j) - (i == j ? l : 0.0);
        auto cross = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
            return std::array<double, 3>{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
                                         x[0] * y[1] - x[1] * y[0]};
        };
        std::array<double, 3> best{};
        double best_norm = -1.0;
        for (const auto& [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            const auto c = cross(r[i], r[j]);
            const double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
            if (n > best_norm) best = c, best_norm = n;
        }
        out.push_back({l, {best[0] / best_norm, best[1] / best_norm, best[2] / best_norm}});
    }
    return out;
}

// Potentials recomputed from scratch: normalize to [0, 1] per column, then
// sum the kernel over all pairs.
inline std::size_t exhaustive_max_potential(const Matrix& X, double radius) {
    const std::size_t n = X.rows(), m = X.cols();
    std::vector<double> lo(m), hi(m);
    for (std::size_t c = 0; c < m; ++c) {
        lo[c] = hi[c] = X(0, c);
        for (std::size_t r = 1; r < n; ++r) lo[c] = std::min(lo[c], X(r, c)), hi[c] = std::max(hi[c], X(r, c));
    }
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                const double span = hi[c] - lo[c];
                const double d = span > 0 ? (X(i, c) - X(j, c)) / span : 0.0;
                d2 += d * d;
            }
            p += std::exp(-4.0 * d2 / (radius * radius));
        }
        if (p > best_p) best_p = p, best = i;
    }
    return best;
}

}  // namespace fispca::oracle
