#pragma once

// The soft sensor: class-specific principal projections feed three TS models
// whose outputs are compared against the power-weighted pooled projection.
// The class whose model deviates least wins.

#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fispca/anfis.hpp"
#include "fispca/behavior.hpp"
#include "fispca/dataset.hpp"
#include "fispca/error.hpp"
#include "fispca/fis.hpp"
#include "fispca/pca.hpp"

namespace fispca {

/// sign(x) * |x|^a. Odd, continuous at 0, strictly increasing for a > 0.
inline double signed_pow(double x, double a) noexcept {
    if (x == 0.0) return 0.0;
    const double m = std::pow(std::abs(x), a);
    return x < 0.0 ? -m : m;
}

/// Exponents applied to the pooled projection target of the drowsy, normal
/// and aggressive models respectively.
struct WeightedExponents {
    double a1 = 1.1;
    double a2 = 1.01;
    double a3 = 1.001;

    [[nodiscard]] double for_class(BehaviorClass c) const noexcept {
        switch (c) {
            case BehaviorClass::drowsy: return a1;
            case BehaviorClass::normal: return a2;
            case BehaviorClass::aggressive: return a3;
        }
        return a1;
    }

    void validate() const {
        if (!(a1 > 0.0 && a2 > 0.0 && a3 > 0.0)) throw UsageError("exponents must be positive");
    }
    /// Equal exponents remove the target separation between classes.
    [[nodiscard]] bool distinct() const noexcept { return a1 != a2 && a2 != a3 && a1 != a3; }

    friend bool operator==(const WeightedExponents&, const WeightedExponents&) = default;
};

struct SoftSensor {
    Variant variant = Variant::B;
    bool standardized = true;
    ProjectionBank bank;
    std::array<TSModel, kClassCount> models;  ///< indexed by BehaviorClass
    WeightedExponents exponents;

    [[nodiscard]] const TSModel& model(BehaviorClass c) const { return models[index_of(c)]; }

    void validate() const {
        const std::size_t d = feature_count(variant);
        if (bank.dim() != d || bank.p1d.axis.size() != d || bank.p1n.axis.size() != d ||
            bank.p1a.axis.size() != d || bank.p1t.axis.size() != d)
            throw ModelError("projection bank dimension does not match variant " + std::string(to_string(variant)));
        for (const auto& m : models)
            if (m.n_inputs() != 3) throw ModelError("class models must take exactly 3 inputs");
        exponents.validate();
    }

    friend bool operator==(const SoftSensor&, const SoftSensor&) = default;
};

struct EpsilonTriple {
    double eps_d = 0.0;
    double eps_n = 0.0;
    double eps_a = 0.0;

    [[nodiscard]] double operator[](BehaviorClass c) const noexcept {
        switch (c) {
            case BehaviorClass::drowsy: return eps_d;
            case BehaviorClass::normal: return eps_n;
            case BehaviorClass::aggressive: return eps_a;
        }
        return eps_d;
    }

    friend bool operator==(const EpsilonTriple&, const EpsilonTriple&) = default;
};

/// Argmin over (eps_d, eps_n, eps_a); ties go to the earlier class.
inline BehaviorClass decide(const EpsilonTriple& e) noexcept {
    BehaviorClass best = BehaviorClass::drowsy;
    if (e.eps_n < e[best]) best = BehaviorClass::normal;
    if (e.eps_a < e[best]) best = BehaviorClass::aggressive;
    return best;
}

struct SensorConfig {
    Variant variant = Variant::B;
    bool standardize = true;
    double pca_threshold = 0.95;  ///< reporting only; the sensor always uses first components
    ClusteringParams clustering;
    TrainingConfig training;
    bool pure_backprop = false;
    WeightedExponents exponents;
};

struct ClassFitReport {
    BehaviorClass label = BehaviorClass::drowsy;
    std::size_t samples = 0;
    std::size_t rules = 0;
    bool ridge_used = false;
    double initial_mse = 0.0;
    std::vector<double> loss_trace;
};

struct FitReport {
    PcaResult pooled;
    std::array<PcaResult, kClassCount> per_class;
    std::array<ClassFitReport, kClassCount> classes;
};

struct FitResult {
    SoftSensor sensor;
    FitReport report;
};

namespace detail {

inline void check_row(const SoftSensor& s, std::span<const double> x) {
    if (x.size() != s.bank.dim())
        throw DataError("feature row has " + std::to_string(x.size()) + " values, model variant " +
                        std::string(to_string(s.variant)) + " expects " + std::to_string(s.bank.dim()));
    for (double v : x)
        if (!std::isfinite(v)) throw DataError("feature row contains non-finite values");
}

}  // namespace detail

/// Fits the projection bank and the three class models. `per_class` is
/// indexed by BehaviorClass and must share the configured variant.
inline FitResult fit(const std::array<FeatureMatrix, kClassCount>& per_class, const SensorConfig& cfg) {
    cfg.clustering.validate();
    cfg.training.validate();
    cfg.exponents.validate();
    for (auto c : kAllClasses) {
        const auto& m = per_class[index_of(c)];
        if (m.variant != cfg.variant)
            throw DataError("variant mismatch: " + std::string(to_string(c)) + " data is variant " +
                            std::string(to_string(m.variant)) + ", config says " + std::string(to_string(cfg.variant)));
        if (m.size() == 0) throw DataError("missing class: no " + std::string(to_string(c)) + " data");
        if (m.size() < 2) throw DataError("insufficient class data: " + std::string(to_string(c)) + " has 1 row");
    }

    auto pooled = FeatureMatrix::empty_of(cfg.variant);
    for (const auto& m : per_class) pooled.append_all(m);

    FitResult out;
    SoftSensor& s = out.sensor;
    s.variant = cfg.variant;
    s.standardized = cfg.standardize;
    s.exponents = cfg.exponents;
    s.bank.standardizer = cfg.standardize ? fit_standardizer(pooled.rows, pooled.columns)
                                          : Standardizer::identity(pooled.dim());

    const double threshold = cfg.pca_threshold;
    out.report.pooled = fit_pca(s.bank.standardizer.apply(pooled.rows), threshold);
    s.bank.p1t = out.report.pooled.components.front();
    std::array<PrincipalComponent*, kClassCount> slots = {&s.bank.p1d, &s.bank.p1n, &s.bank.p1a};
    for (auto c : kAllClasses) {
        auto& r = out.report.per_class[index_of(c)];
        r = fit_pca(s.bank.standardizer.apply(per_class[index_of(c)].rows), threshold);
        *slots[index_of(c)] = r.components.front();
    }

    auto train_class = [&](BehaviorClass c) {
        const auto& data = per_class[index_of(c)];
        Matrix inputs(data.size(), 3);
        std::vector<double> target(data.size());
        const double a = s.exponents.for_class(c);
        for (std::size_t r = 0; r < data.size(); ++r) {
            const auto u = s.bank.inputs(data.rows.row(r));
            for (std::size_t i = 0; i < 3; ++i) inputs(r, i) = u[i];
            target[r] = signed_pow(s.bank.total(data.rows.row(r)), a);
        }
        return build_anfis(inputs, target, cfg.clustering, cfg.training, cfg.pure_backprop);
    };

    std::array<std::future<AnfisResult>, kClassCount> jobs;
    for (auto c : kAllClasses) jobs[index_of(c)] = std::async(std::launch::async, train_class, c);
    for (auto c : kAllClasses) {
        auto res = jobs[index_of(c)].get();
        auto& rep = out.report.classes[index_of(c)];
        rep.label = c;
        rep.samples = per_class[index_of(c)].size();
        rep.rules = res.training.model.rules().size();
        rep.ridge_used = res.init.ridge_used;
        rep.initial_mse = res.training.initial_mse;
        rep.loss_trace = std::move(res.training.loss_trace);
        s.models[index_of(c)] = std::move(res.training.model);
    }
    return out;
}

/// Splits a labeled matrix into per-class matrices and fits.
inline FitResult fit(const FeatureMatrix& labeled, const SensorConfig& cfg) {
    std::array<FeatureMatrix, kClassCount> parts;
    for (auto c : kAllClasses) parts[index_of(c)] = labeled.subset(c);
    return fit(parts, cfg);
}

inline EpsilonTriple epsilons(const SoftSensor& s, std::span<const double> x) {
    detail::check_row(s, x);
    const auto u = s.bank.inputs(x);
    const double pt = s.bank.total(x);
    std::array<double, kClassCount> e{};
    for (auto c : kAllClasses) {
        const double target = signed_pow(pt, s.exponents.for_class(c));
        e[index_of(c)] = std::abs(infer(s.model(c), u) - target);
    }
    return {e[0], e[1], e[2]};
}

struct Decision {
    BehaviorClass label = BehaviorClass::drowsy;
    EpsilonTriple eps;
};

inline Decision classify(const SoftSensor& s, std::span<const double> x) {
    const auto e = epsilons(s, x);
    return {decide(e), e};
}

/// Per-stream state for trailing moving-average smoothing of the epsilons.
class StreamClassifier {
public:
    struct Output {
        BehaviorClass label = BehaviorClass::drowsy;
        EpsilonTriple raw;
        EpsilonTriple smoothed;
    };

    StreamClassifier(const SoftSensor& sensor, std::size_t window) : sensor_(&sensor), window_(window) {
        if (window_ < 1) throw UsageError("smoothing window must be >= 1");
    }

    /// Classifies one row; non-finite or misshaped rows return nullopt and do
    /// not enter the window.
    std::optional<Output> push(std::span<const double> x) {
        if (x.size() != sensor_->bank.dim()) return std::nullopt;
        for (double v : x)
            if (!std::isfinite(v)) return std::nullopt;
        Output out;
        out.raw = epsilons(*sensor_, x);
        history_.push_back(out.raw);
        if (history_.size() > window_) history_.pop_front();
        if (window_ == 1) {
            out.smoothed = out.raw;
        } else {
            EpsilonTriple sum;
            for (const auto& e : history_) {
                sum.eps_d += e.eps_d;
                sum.eps_n += e.eps_n;
                sum.eps_a += e.eps_a;
            }
            const auto k = static_cast<double>(history_.size());
            out.smoothed = {sum.eps_d / k, sum.eps_n / k, sum.eps_a / k};
        }
        out.label = decide(out.smoothed);
        return out;
    }

private:
    const SoftSensor* sensor_;
    std::size_t window_;
    std::deque<EpsilonTriple> history_;
};

struct StreamEntry {
    std::size_t row = 0;
    StreamClassifier::Output out;
};

struct StreamResult {
    std::vector<StreamEntry> entries;
    std::vector<std::size_t> flagged;  ///< rows skipped as invalid
};

inline StreamResult classify_stream(const SoftSensor& s, std::span<const std::vector<double>> rows,
                                    std::size_t window = 1) {
    StreamClassifier sc(s, window);
    StreamResult res;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (auto o = sc.push(rows[i]))
            res.entries.push_back({i, *o});
        else
            res.flagged.push_back(i);
    }
    return res;
}

}  // namespace fispca
