#pragma once

// Data-driven construction of TS models: subtractive clustering for the rule
// structure, weighted least squares for the consequents, and full-batch
// backpropagation with backtracking for refinement.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fispca/error.hpp"
#include "fispca/fis.hpp"
#include "fispca/matrix.hpp"

namespace fispca {

struct ClusteringParams {
    double radius = 0.5;         ///< r_a, fraction of the normalized range
    double squash = 1.25;        ///< r_b = squash * r_a
    double accept_ratio = 0.5;
    double reject_ratio = 0.15;

    void validate() const {
        if (!(radius > 0.0 && radius <= 1.0)) throw UsageError("clustering radius must be in (0, 1]");
        if (!(squash >= 1.0)) throw UsageError("clustering squash factor must be >= 1");
        if (!(reject_ratio >= 0.0 && reject_ratio < accept_ratio && accept_ratio <= 1.0))
            throw UsageError("clustering ratios must satisfy 0 <= reject < accept <= 1");
    }
};

struct Clusters {
    std::vector<std::vector<double>> centers;  ///< original units, selection order
    std::vector<std::size_t> indices;          ///< row of X chosen as each center
    std::vector<double> potentials;            ///< potential at selection time
};

namespace detail {

struct UnitScaling {
    std::vector<double> lo;
    std::vector<double> range;  ///< 0 for constant columns
};

inline UnitScaling unit_scaling(const Matrix& X) {
    UnitScaling s{std::vector<double>(X.cols(), std::numeric_limits<double>::infinity()),
                  std::vector<double>(X.cols(), 0.0)};
    std::vector<double> hi(X.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < X.cols(); ++c) {
            s.lo[c] = std::min(s.lo[c], X(r, c));
            hi[c] = std::max(hi[c], X(r, c));
        }
    for (std::size_t c = 0; c < X.cols(); ++c) s.range[c] = hi[c] - s.lo[c];
    return s;
}

inline Matrix to_unit_cube(const Matrix& X, const UnitScaling& s) {
    Matrix out(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < X.cols(); ++c)
            out(r, c) = s.range[c] > 0.0 ? (X(r, c) - s.lo[c]) / s.range[c] : 0.0;
    return out;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

inline std::size_t argmax_first(std::span<const double> v) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace detail

/// Cluster-estimation center selection on the unit-cube normalization of X.
inline Clusters subtractive_clustering(const Matrix& X, const ClusteringParams& p = {}) {
    p.validate();
    const std::size_t n = X.rows();
    if (n == 0) throw DataError("subtractive clustering on empty data");

    const auto scaling = detail::unit_scaling(X);
    const Matrix U = detail::to_unit_cube(X, scaling);
    const double alpha = 4.0 / (p.radius * p.radius);
    const double rb = p.squash * p.radius;
    const double beta = 4.0 / (rb * rb);

    std::vector<double> potential(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) potential[i] += std::exp(-alpha * detail::squared_distance(U.row(i), U.row(j)));

    Clusters out;
    auto accept = [&](std::size_t k) {
        const double pk = potential[k];
        out.indices.push_back(k);
        out.potentials.push_back(pk);
        out.centers.emplace_back(X.row(k).begin(), X.row(k).end());
        for (std::size_t i = 0; i < n; ++i)
            potential[i] -= pk * std::exp(-beta * detail::squared_distance(U.row(i), U.row(k)));
    };

    std::size_t first = detail::argmax_first(potential);
    const double p1 = potential[first];
    accept(first);

    while (out.centers.size() < n) {
        const std::size_t k = detail::argmax_first(potential);
        const double pk = potential[k];
        if (!(pk > 0.0)) break;
        if (pk > p.accept_ratio * p1) {
            accept(k);
            continue;
        }
        if (pk < p.reject_ratio * p1) break;
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t c : out.indices) dmin = std::min(dmin, std::sqrt(detail::squared_distance(U.row(k), U.row(c))));
        if (dmin / p.radius + pk / p1 >= 1.0)
            accept(k);
        else
            potential[k] = 0.0;
    }
    return out;
}

/// Range of each column of X; zero ranges are reported as 1.
inline std::vector<double> feature_ranges(const Matrix& X) {
    auto s = detail::unit_scaling(X);
    for (auto& r : s.range)
        if (!(r > 0.0)) r = 1.0;
    return s.range;
}

struct InitDiagnostics {
    bool ridge_used = false;
    std::size_t unknowns = 0;
    std::size_t rank = 0;
};

inline constexpr double kRidgeLambda = 1e-8;

/// Normalized firing strengths for one sample, one-hot on the nearest rule
/// when the sum underflows (same convention as inference).
inline std::vector<double> normalized_weights(const TSModel& model, std::span<const double> x) {
    const auto pass = forward(model, x);
    std::vector<double> w(pass.weights.size(), 0.0);
    if (pass.fallback_rule >= 0) {
        w[static_cast<std::size_t>(pass.fallback_rule)] = 1.0;
        return w;
    }
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = pass.weights[j] / pass.weight_sum;
    return w;
}

/// Least-squares consequents for fixed antecedents. Falls back to ridge
/// regression when the system is underdetermined or rank deficient.
inline TSModel fit_consequents(const TSModel& model, const Matrix& X, std::span<const double> y,
                               InitDiagnostics* diag = nullptr) {
    const std::size_t n = model.n_inputs();
    const std::size_t k = model.rules().size();
    const std::size_t unknowns = k * (n + 1);
    const auto rows = static_cast<Eigen::Index>(X.rows());
    Eigen::MatrixXd A(rows, static_cast<Eigen::Index>(unknowns));
    Eigen::VectorXd b(rows);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto x = X.row(r);
        const auto w = normalized_weights(model, x);
        for (std::size_t j = 0; j < k; ++j) {
            const auto base = static_cast<Eigen::Index>(j * (n + 1));
            A(static_cast<Eigen::Index>(r), base) = w[j];
            for (std::size_t i = 0; i < n; ++i) A(static_cast<Eigen::Index>(r), base + static_cast<Eigen::Index>(i) + 1) = w[j] * x[i];
        }
        b(static_cast<Eigen::Index>(r)) = y[r];
    }

    Eigen::VectorXd theta;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    const auto rank = static_cast<std::size_t>(qr.rank());
    const bool ridge = X.rows() < unknowns || rank < unknowns;
    if (ridge) {
        Eigen::MatrixXd normal = A.transpose() * A;
        normal.diagonal().array() += kRidgeLambda;
        theta = normal.ldlt().solve(A.transpose() * b);
    } else {
        theta = qr.solve(b);
    }
    if (diag) *diag = {ridge, unknowns, rank};

    auto rules = model.rules();
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i <= n; ++i) rules[j].consequent[i] = theta(static_cast<Eigen::Index>(j * (n + 1) + i));
    return TSModel(n, std::move(rules));
}

/// One rule per center. Antecedent widths follow the clustering radius:
/// sigma_i = r_a * range(X_i) / sqrt(8). Centers may carry extra trailing
/// coordinates (e.g. the output dimension), which are ignored.
inline TSModel init_fis(const std::vector<std::vector<double>>& centers, const Matrix& X, std::span<const double> y,
                        double radius = ClusteringParams{}.radius, InitDiagnostics* diag = nullptr) {
    if (centers.empty()) throw DataError("init_fis needs at least one center");
    if (X.rows() != y.size() || X.rows() == 0) throw DataError("init_fis: inputs and targets misaligned");
    const std::size_t n = X.cols();
    const auto ranges = feature_ranges(X);
    std::vector<Rule> rules;
    for (const auto& c : centers) {
        if (c.size() < n) throw DataError("cluster center has fewer coordinates than model inputs");
        Rule r;
        for (std::size_t i = 0; i < n; ++i) r.antecedents.push_back({c[i], radius * ranges[i] / std::sqrt(8.0)});
        r.consequent.assign(n + 1, 0.0);
        rules.push_back(std::move(r));
    }
    return fit_consequents(TSModel(n, std::move(rules)), X, y, diag);
}

// ---------------------------------------------------------------------------
// Backpropagation.

struct TrainingConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.01;
    std::uint64_t shuffle_seed = 0;
    double early_stop_tol = 1e-6;
    std::size_t early_stop_window = 10;
    int max_halvings = 20;

    void validate() const {
        if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
    }
};

/// Parameter layout per rule j: centers[0..n), widths[0..n), consequent[0..n].
inline std::vector<double> flatten(const TSModel& m) {
    std::vector<double> p;
    for (const auto& r : m.rules()) {
        for (const auto& mf : r.antecedents) p.push_back(mf.center);
        for (const auto& mf : r.antecedents) p.push_back(mf.width);
        p.insert(p.end(), r.consequent.begin(), r.consequent.end());
    }
    return p;
}

inline TSModel unflatten(const TSModel& shape, std::span<const double> p) {
    const std::size_t n = shape.n_inputs();
    auto rules = shape.rules();
    std::size_t at = 0;
    for (auto& r : rules) {
        for (std::size_t i = 0; i < n; ++i) r.antecedents[i].center = p[at++];
        for (std::size_t i = 0; i < n; ++i) r.antecedents[i].width = p[at++];
        for (std::size_t i = 0; i <= n; ++i) r.consequent[i] = p[at++];
    }
    return TSModel(n, std::move(rules));
}

inline std::string parameter_name(const TSModel& m, std::size_t index) {
    const std::size_t n = m.n_inputs();
    const std::size_t per_rule = 3 * n + 1;
    const std::size_t j = index / per_rule;
    const std::size_t o = index % per_rule;
    const std::string rule = "rule " + std::to_string(j) + " ";
    if (o < n) return rule + "center[" + std::to_string(o) + "]";
    if (o < 2 * n) return rule + "width[" + std::to_string(o - n) + "]";
    return rule + "consequent[" + std::to_string(o - 2 * n) + "]";
}

inline double mse(const TSModel& m, const Matrix& X, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const double e = infer(m, X.row(r)) - y[r];
        s += e * e;
    }
    return s / static_cast<double>(X.rows());
}

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;  ///< flatten() layout
};

/// Analytic gradient of the mean squared error with respect to every parameter.
inline LossGradient mse_gradient(const TSModel& m, const Matrix& X, std::span<const double> y) {
    const std::size_t n = m.n_inputs();
    const std::size_t per_rule = 3 * n + 1;
    const auto& rules = m.rules();
    LossGradient out;
    out.gradient.assign(rules.size() * per_rule, 0.0);
    const double inv_n = 1.0 / static_cast<double>(X.rows());

    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto x = X.row(r);
        const auto pass = forward(m, x);
        const double e = pass.output - y[r];
        out.loss += e * e * inv_n;
        const double dl = 2.0 * e * inv_n;

        if (pass.fallback_rule >= 0) {
            const auto base = static_cast<std::size_t>(pass.fallback_rule) * per_rule + 2 * n;
            out.gradient[base] += dl;
            for (std::size_t i = 0; i < n; ++i) out.gradient[base + 1 + i] += dl * x[i];
            continue;
        }
        for (std::size_t j = 0; j < rules.size(); ++j) {
            const double wbar = pass.weights[j] / pass.weight_sum;
            const double dw = dl * (pass.outputs[j] - pass.output) / pass.weight_sum * pass.weights[j];
            const std::size_t base = j * per_rule;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& mf = rules[j].antecedents[i];
                const double diff = x[i] - mf.center;
                const double s2 = mf.width * mf.width;
                out.gradient[base + i] += dw * diff / s2;
                out.gradient[base + n + i] += dw * diff * diff / (s2 * mf.width);
            }
            out.gradient[base + 2 * n] += dl * wbar;
            for (std::size_t i = 0; i < n; ++i) out.gradient[base + 2 * n + 1 + i] += dl * wbar * x[i];
        }
    }
    for (std::size_t k = 0; k < out.gradient.size(); ++k)
        if (!std::isfinite(out.gradient[k])) throw DataError("non-finite gradient for " + parameter_name(m, k));
    return out;
}

struct TrainingResult {
    TSModel model;
    double initial_mse = 0.0;
    std::vector<double> loss_trace;  ///< MSE after each completed epoch
};

/// Full-batch gradient descent. Each epoch tries the step at the configured
/// learning rate and halves it until the loss does not increase; if no
/// halving helps the parameters are left unchanged for that epoch.
inline TrainingResult train_backprop(const TSModel& model, const Matrix& X, std::span<const double> y,
                                     const TrainingConfig& cfg = {}) {
    cfg.validate();
    if (X.rows() != y.size() || X.rows() == 0) throw DataError("train_backprop: inputs and targets misaligned");
    TrainingResult res{model, 0.0, {}};
    res.initial_mse = mse(model, X, y);
    if (!std::isfinite(res.initial_mse)) throw DataError("initial loss is not finite");
    if (cfg.epochs == 0) return res;

    const std::size_t n = model.n_inputs();
    const std::size_t per_rule = 3 * n + 1;
    const auto ranges = feature_ranges(X);
    auto params = flatten(model);
    double loss = res.initial_mse;
    std::vector<double> candidate(params.size());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto lg = mse_gradient(res.model, X, y);
        double step = cfg.learning_rate;
        for (int h = 0; h <= cfg.max_halvings; ++h, step *= 0.5) {
            for (std::size_t k = 0; k < params.size(); ++k) candidate[k] = params[k] - step * lg.gradient[k];
            for (std::size_t j = 0; j < model.rules().size(); ++j)
                for (std::size_t i = 0; i < n; ++i) {
                    auto& w = candidate[j * per_rule + n + i];
                    w = std::max(w, 1e-6 * ranges[i]);
                }
            const auto trial = unflatten(res.model, candidate);
            const double trial_loss = mse(trial, X, y);
            if (std::isfinite(trial_loss) && trial_loss <= loss) {
                params = candidate;
                res.model = trial;
                loss = trial_loss;
                break;
            }
        }
        res.loss_trace.push_back(loss);

        const std::size_t w = cfg.early_stop_window;
        if (w > 0 && res.loss_trace.size() > w) {
            const double before = res.loss_trace[res.loss_trace.size() - 1 - w];
            if (before - loss <= cfg.early_stop_tol * before) break;
        }
    }
    return res;
}

struct AnfisResult {
    TrainingResult training;
    Clusters clusters;
    InitDiagnostics init;
};

/// Clusters the joint input-output data, initializes one rule per center,
/// then refines by backpropagation. With `pure_backprop` the consequents
/// start at the constant mean of y instead of the least-squares fit.
inline AnfisResult build_anfis(const Matrix& X, std::span<const double> y, const ClusteringParams& cp,
                               const TrainingConfig& tc, bool pure_backprop = false) {
    if (X.rows() != y.size() || X.rows() == 0) throw DataError("anfis: inputs and targets misaligned");
    Matrix joint(X.rows(), X.cols() + 1);
    for (std::size_t r = 0; r < X.rows(); ++r) {
        for (std::size_t c = 0; c < X.cols(); ++c) joint(r, c) = X(r, c);
        joint(r, X.cols()) = y[r];
    }
    AnfisResult out;
    out.clusters = subtractive_clustering(joint, cp);
    TSModel init = init_fis(out.clusters.centers, X, y, cp.radius, &out.init);
    if (pure_backprop) {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        auto rules = init.rules();
        for (auto& r : rules) {
            std::fill(r.consequent.begin(), r.consequent.end(), 0.0);
            r.consequent[0] = mean;
        }
        init = TSModel(X.cols(), std::move(rules));
    }
    out.training = train_backprop(init, X, y, tc);
    return out;
}

}  // namespace fispca
