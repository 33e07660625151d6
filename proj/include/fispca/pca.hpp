#pragma once

// Standardization and principal-component extraction via cyclic Jacobi.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fispca/error.hpp"
#include "fispca/matrix.hpp"

namespace fispca {

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    /// Pass-through transform (mean 0, scale 1): projections on raw units.
    static Standardizer identity(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

    [[nodiscard]] std::size_t dim() const noexcept { return mean.size(); }

    void apply(std::span<const double> x, std::span<double> out) const {
        check(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / scale[i];
    }
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> out(x.size());
        apply(x, out);
        return out;
    }
    [[nodiscard]] Matrix apply(const Matrix& X) const {
        Matrix out(X.rows(), X.cols());
        for (std::size_t r = 0; r < X.rows(); ++r) apply(X.row(r), out.row(r));
        return out;
    }
    [[nodiscard]] std::vector<double> invert(std::span<const double> z) const {
        check(z.size());
        std::vector<double> out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * scale[i] + mean[i];
        return out;
    }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
    void check(std::size_t n) const {
        if (n != mean.size())
            throw DataError("dimension mismatch: got " + std::to_string(n) + ", expected " + std::to_string(mean.size()));
    }
};

/// Per-column mean and (N-1) standard deviation. Constant columns are rejected.
inline Standardizer fit_standardizer(const Matrix& X, std::span<const std::string> names = {}) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    if (n < 2) throw DataError("standardizer needs at least 2 rows");
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += X(r, c);
        const double m = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) ss += (X(r, c) - m) * (X(r, c) - m);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!std::isfinite(sd) || !(sd > 0.0)) {
            const std::string name = c < names.size() ? names[c] : "#" + std::to_string(c);
            throw DataError("constant column '" + name + "'");
        }
        s.mean[c] = m;
        s.scale[c] = sd;
    }
    return s;
}

struct PrincipalComponent {
    std::vector<double> axis;
    double eigenvalue = 0.0;
    double evr = 0.0;

    friend bool operator==(const PrincipalComponent&, const PrincipalComponent&) = default;
};

struct SymmetricEigen {
    std::vector<double> values;  ///< unsorted, diagonal order
    Matrix vectors;              ///< column k pairs with values[k]
    int sweeps = 0;
};

/// Cyclic Jacobi rotations on a symmetric matrix. Stops once the off-diagonal
/// Frobenius norm falls below tol relative to the full norm.
inline SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
    const std::size_t d = a.rows();
    if (a.cols() != d) throw DataError("eigensolver needs a square matrix");
    Matrix v(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < d; ++q)
                if (p != q) s += a(p, q) * a(p, q);
        return std::sqrt(s);
    };
    double full = 0.0;
    for (double x : a.data()) full += x * x;
    full = std::sqrt(full);

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        const double off = off_norm();
        if (off == 0.0 || off <= tol * full) break;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen out;
    out.values.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.values[i] = a(i, i);
    out.vectors = std::move(v);
    out.sweeps = sweep;
    return out;
}

/// Sample covariance with the (N-1) denominator.
inline Matrix covariance(const Matrix& X) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) mean[c] += X(r, c);
    for (auto& m : mean) m /= static_cast<double>(n);
    Matrix cov(d, d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < d; ++i) {
            const double di = X(r, i) - mean[i];
            for (std::size_t j = i; j < d; ++j) cov(i, j) += di * (X(r, j) - mean[j]);
        }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(n - 1);
            cov(j, i) = cov(i, j);
        }
    return cov;
}

/// Flips the axis so its largest-magnitude coordinate is positive (lowest index on ties).
inline void canonicalize_sign(std::vector<double>& axis) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (std::abs(axis[i]) > std::abs(axis[best])) best = i;
    if (axis.empty() || axis[best] >= 0.0) return;
    for (auto& x : axis) x = -x;
}

/// Smallest k whose cumulative explained-variance ratio reaches `threshold`.
inline std::size_t select_component_count(std::span<const double> eigenvalues, double threshold) {
    const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
    if (!(total > 0.0)) throw DataError("zero total variance");
    double cum = 0.0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        cum += eigenvalues[k];
        if (cum / total >= threshold) return k + 1;
    }
    return eigenvalues.size();
}

struct PcaResult {
    std::vector<PrincipalComponent> components;  ///< descending eigenvalue
    std::size_t selected = 0;                    ///< minimal k reaching the threshold
    double total_variance = 0.0;
};

inline PcaResult fit_pca(const Matrix& Z, double threshold = 0.95) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw UsageError("pca threshold must be in (0, 1]");
    const std::size_t n = Z.rows();
    const std::size_t d = Z.cols();
    if (n < 2) throw DataError("pca needs at least 2 rows");
    for (double x : Z.data())
        if (!std::isfinite(x)) throw DataError("pca input contains non-finite entries");

    const auto eig = jacobi_eigen(covariance(Z));
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return eig.values[i] > eig.values[j]; });

    std::vector<double> sorted(d);
    for (std::size_t k = 0; k < d; ++k) sorted[k] = std::max(0.0, eig.values[order[k]]);
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    if (!(total > 0.0)) throw DataError("pca input has zero variance");

    PcaResult res;
    res.total_variance = total;
    const std::size_t keep = std::min(n - 1, d);
    for (std::size_t k = 0; k < keep; ++k) {
        PrincipalComponent pc;
        pc.axis = eig.vectors.column(order[k]);
        const double norm = std::sqrt(dot(pc.axis, pc.axis));
        for (auto& x : pc.axis) x /= norm;
        canonicalize_sign(pc.axis);
        pc.eigenvalue = sorted[k];
        pc.evr = sorted[k] / total;
        res.components.push_back(std::move(pc));
    }
    res.selected = std::min(select_component_count(sorted, threshold), keep);
    return res;
}

/// Score of a raw feature vector on a component: <standardize(x), axis>.
inline double project(std::span<const double> x, const PrincipalComponent& c, const Standardizer& s) {
    if (x.size() != c.axis.size() || x.size() != s.dim())
        throw DataError("dimension mismatch in projection: got " + std::to_string(x.size()) + ", expected " +
                        std::to_string(c.axis.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - s.mean[i]) / s.scale[i] * c.axis[i];
    return acc;
}

inline std::vector<double> project(const Matrix& X, const PrincipalComponent& c, const Standardizer& s) {
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) out[r] = project(X.row(r), c, s);
    return out;
}

/// Shared standardizer plus the first components of the drowsy, normal,
/// aggressive and pooled training data.
struct ProjectionBank {
    Standardizer standardizer;
    PrincipalComponent p1d, p1n, p1a, p1t;

    [[nodiscard]] std::size_t dim() const noexcept { return standardizer.dim(); }

    /// Inputs of every class model: scores on P1d, P1n, P1a.
    [[nodiscard]] std::array<double, 3> inputs(std::span<const double> x) const {
        return {project(x, p1d, standardizer), project(x, p1n, standardizer), project(x, p1a, standardizer)};
    }
    [[nodiscard]] double total(std::span<const double> x) const { return project(x, p1t, standardizer); }

    friend bool operator==(const ProjectionBank&, const ProjectionBank&) = default;
};

}  // namespace fispca
