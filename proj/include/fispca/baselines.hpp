#pragma once

// Distance-weighted k-nearest-neighbours on PCA scores, the reference
// classical classifier.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fispca/behavior.hpp"
#include "fispca/dataset.hpp"
#include "fispca/error.hpp"
#include "fispca/pca.hpp"

namespace fispca {

struct KnnOptions {
    std::size_t k = 10;
    double pca_threshold = 0.95;
    bool standardize = true;
};

struct KnnModel {
    std::size_t k = 10;
    Standardizer standardizer;
    std::vector<PrincipalComponent> components;  ///< retained axes
    Matrix points;                               ///< training scores, one row per sample
    std::vector<BehaviorClass> labels;

    [[nodiscard]] std::vector<double> scores(std::span<const double> x) const {
        std::vector<double> s(components.size());
        for (std::size_t c = 0; c < components.size(); ++c) s[c] = project(x, components[c], standardizer);
        return s;
    }
};

inline KnnModel knn_fit(const FeatureMatrix& X, const KnnOptions& opt = {}) {
    if (opt.k < 1) throw UsageError("k must be >= 1");
    if (X.size() < opt.k)
        throw DataError("knn needs at least k = " + std::to_string(opt.k) + " samples, got " + std::to_string(X.size()));
    KnnModel m;
    m.k = opt.k;
    m.standardizer = opt.standardize ? fit_standardizer(X.rows, X.columns) : Standardizer::identity(X.dim());
    const auto pca = fit_pca(m.standardizer.apply(X.rows), opt.pca_threshold);
    m.components.assign(pca.components.begin(), pca.components.begin() + static_cast<std::ptrdiff_t>(pca.selected));
    m.points = Matrix(0, m.components.size());
    for (std::size_t r = 0; r < X.size(); ++r) m.points.append_row(m.scores(X.rows.row(r)));
    m.labels = X.labels;
    return m;
}

/// Vote in score space. Weights are 1/d^2; a zero-distance neighbour decides
/// alone (earliest stored index). Weight ties go to the earlier class.
inline BehaviorClass knn_predict_scores(const KnnModel& m, std::span<const double> s) {
    if (s.size() != m.points.cols()) throw DataError("knn: score dimension mismatch");
    const std::size_t n = m.points.rows();
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const auto p = m.points.row(i);
        for (std::size_t c = 0; c < s.size(); ++c) acc += (p[c] - s[c]) * (p[c] - s[c]);
        d2[i] = acc;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t k = std::min(m.k, n);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); });

    for (std::size_t i = 0; i < k; ++i)
        if (d2[idx[i]] == 0.0) return m.labels[idx[i]];

    std::array<double, kClassCount> votes{};
    for (std::size_t i = 0; i < k; ++i) votes[index_of(m.labels[idx[i]])] += 1.0 / d2[idx[i]];
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c)
        if (votes[c] > votes[best]) best = c;
    return kAllClasses[best];
}

inline BehaviorClass knn_predict(const KnnModel& m, std::span<const double> x) {
    return knn_predict_scores(m, m.scores(x));
}

}  // namespace fispca
