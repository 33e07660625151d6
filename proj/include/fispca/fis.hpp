#pragma once

// First-order Takagi-Sugeno inference: Gaussian antecedents combined with the
// product t-norm, affine consequents, weighted-average defuzzification.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fispca/error.hpp"

namespace fispca {

struct GaussianMF {
    double center = 0.0;
    double width = 1.0;  ///< sigma, > 0

    friend bool operator==(const GaussianMF&, const GaussianMF&) = default;
};

inline double membership(const GaussianMF& mf, double x) noexcept {
    const double u = (x - mf.center) / mf.width;
    return std::exp(-0.5 * u * u);
}

/// IF x1 is A1 and ... and xn is An THEN f = g0 + g1 x1 + ... + gn xn.
struct Rule {
    std::vector<GaussianMF> antecedents;
    std::vector<double> consequent;  ///< g0..gn

    [[nodiscard]] std::size_t arity() const noexcept { return antecedents.size(); }

    [[nodiscard]] double output(std::span<const double> x) const noexcept {
        double f = consequent[0];
        for (std::size_t i = 0; i < x.size(); ++i) f += consequent[i + 1] * x[i];
        return f;
    }

    friend bool operator==(const Rule&, const Rule&) = default;
};

/// Immutable rule base; all rules share the model arity.
class TSModel {
public:
    TSModel() = default;
    TSModel(std::size_t n_inputs, std::vector<Rule> rules) : n_inputs_(n_inputs), rules_(std::move(rules)) {
        if (rules_.empty()) throw ModelError("a TS model needs at least one rule");
        for (std::size_t j = 0; j < rules_.size(); ++j) {
            const auto& r = rules_[j];
            if (r.antecedents.size() != n_inputs_ || r.consequent.size() != n_inputs_ + 1)
                throw ModelError("rule " + std::to_string(j) + " does not match model arity " +
                                 std::to_string(n_inputs_));
            for (const auto& mf : r.antecedents)
                if (!(mf.width > 0.0) || !std::isfinite(mf.center) || !std::isfinite(mf.width))
                    throw ModelError("rule " + std::to_string(j) + " has an invalid membership function");
        }
    }

    [[nodiscard]] std::size_t n_inputs() const noexcept { return n_inputs_; }
    [[nodiscard]] const std::vector<Rule>& rules() const noexcept { return rules_; }

    friend bool operator==(const TSModel&, const TSModel&) = default;

private:
    std::size_t n_inputs_ = 0;
    std::vector<Rule> rules_;
};

inline void check_arity(std::size_t expected, std::size_t got) {
    if (expected != got)
        throw DataError("arity mismatch: model takes " + std::to_string(expected) + " inputs, got " +
                        std::to_string(got));
}

inline double firing_strength(const Rule& rule, std::span<const double> x) {
    check_arity(rule.arity(), x.size());
    double w = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) w *= membership(rule.antecedents[i], x[i]);
    return w;
}

/// log of the firing strength; finite even where the product underflows.
inline double log_firing_strength(const Rule& rule, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = (x[i] - rule.antecedents[i].center) / rule.antecedents[i].width;
        s -= 0.5 * u * u;
    }
    return s;
}

inline constexpr double kUnderflowWeight = 1e-300;

/// Per-rule quantities of one forward pass; reused by the trainer.
struct ForwardPass {
    std::vector<double> weights;
    std::vector<double> outputs;
    double weight_sum = 0.0;
    double output = 0.0;
    /// Index of the rule used alone when the weight sum underflowed, else -1.
    int fallback_rule = -1;
};

inline ForwardPass forward(const TSModel& model, std::span<const double> x) {
    check_arity(model.n_inputs(), x.size());
    const auto& rules = model.rules();
    ForwardPass p;
    p.weights.resize(rules.size());
    p.outputs.resize(rules.size());
    double num = 0.0;
    for (std::size_t j = 0; j < rules.size(); ++j) {
        p.weights[j] = firing_strength(rules[j], x);
        p.outputs[j] = rules[j].output(x);
        num += p.weights[j] * p.outputs[j];
        p.weight_sum += p.weights[j];
    }
    if (p.weight_sum >= kUnderflowWeight) {
        p.output = num / p.weight_sum;
        return p;
    }
    // Nearest rule: largest (log) firing strength, lowest index on ties.
    std::size_t best = 0;
    double best_log = log_firing_strength(rules[0], x);
    for (std::size_t j = 1; j < rules.size(); ++j) {
        const double l = log_firing_strength(rules[j], x);
        if (l > best_log) {
            best_log = l;
            best = j;
        }
    }
    p.fallback_rule = static_cast<int>(best);
    p.output = p.outputs[best];
    return p;
}

inline double infer(const TSModel& model, std::span<const double> x) { return forward(model, x).output; }

/// Weighted average of rule outputs for externally supplied weights.
inline double defuzzify(std::span<const double> weights, std::span<const double> outputs) {
    if (weights.size() != outputs.size() || weights.empty()) throw DataError("defuzzify: size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        num += weights[j] * outputs[j];
        den += weights[j];
    }
    if (den >= kUnderflowWeight) return num / den;
    std::size_t best = 0;
    for (std::size_t j = 1; j < weights.size(); ++j)
        if (weights[j] > weights[best]) best = j;
    return outputs[best];
}

}  // namespace fispca
