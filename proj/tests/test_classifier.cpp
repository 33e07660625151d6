#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "fispca/classifier.hpp"
#include "fispca/eval.hpp"
#include "fispca/fixture.hpp"

using namespace fispca;

namespace {

PrincipalComponent unit_axis(std::size_t d, std::size_t k) {
    PrincipalComponent pc;
    pc.axis.assign(d, 0.0);
    pc.axis[k] = 1.0;
    pc.eigenvalue = 1.0;
    pc.evr = 0.25;
    return pc;
}

// Sensor whose epsilons are |x0|, |x1|, |x2| whenever x3 = 0: each class model
// returns one of its inputs and every target vanishes.
SoftSensor transparent_sensor() {
    SoftSensor s;
    s.variant = Variant::B;
    s.standardized = false;
    s.bank.standardizer = Standardizer::identity(7);
    s.bank.p1d = unit_axis(7, 0);
    s.bank.p1n = unit_axis(7, 1);
    s.bank.p1a = unit_axis(7, 2);
    s.bank.p1t = unit_axis(7, 3);
    for (std::size_t c = 0; c < 3; ++c) {
        Rule r;
        r.antecedents.assign(3, GaussianMF{0.0, 1.0});
        r.consequent.assign(4, 0.0);
        r.consequent[c + 1] = 1.0;
        s.models[c] = TSModel(3, {r});
    }
    return s;
}

std::vector<double> row_with_eps(double d, double n, double a) { return {d, n, a, 0.0, 0.0, 0.0, 0.0}; }

const FitResult& fixture_fit() {
    static const FitResult fr = [] {
        const auto fx = generate_fixture(7);
        return fit(fx.train, SensorConfig{});
    }();
    return fr;
}

}  // namespace

TEST(SignedPow, Examples) {
    EXPECT_EQ(signed_pow(0.0, 1.1), 0.0);
    for (double a : {0.3, 1.0, 1.001, 1.1, 2.5}) EXPECT_EQ(signed_pow(1.0, a), 1.0);
    EXPECT_NEAR(signed_pow(-4.0, 1.1), -std::exp(1.1 * std::log(4.0)), 1e-13);
    EXPECT_NEAR(signed_pow(-4.0, 1.1), -4.5948, 5e-5);
}

TEST(SignedPow, OddIdentityAndMonotone) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(gen);
        EXPECT_EQ(signed_pow(-x, 1.1), -signed_pow(x, 1.1));
        EXPECT_EQ(signed_pow(x, 1.0), x);
        const double y = x + std::abs(u(gen)) + 1e-6;
        EXPECT_LT(signed_pow(x, 1.01), signed_pow(y, 1.01));
    }
}

TEST(Decide, PaperAndTieCases) {
    EXPECT_EQ(decide({0.1, 5.0, 7.0}), BehaviorClass::drowsy);
    EXPECT_EQ(decide({2.0, 2.0, 2.0}), BehaviorClass::drowsy);
    EXPECT_EQ(decide({86.4, 0.005, 5.8}), BehaviorClass::normal);
    EXPECT_EQ(decide({3.0, 1.0, 1.0}), BehaviorClass::normal);
    EXPECT_EQ(decide({3.0, 2.0, 1.0}), BehaviorClass::aggressive);
}

TEST(Decide, InvariantUnderIncreasingTransforms) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    const std::vector<std::function<double(double)>> transforms = {
        [](double e) { return std::log1p(e); }, [](double e) { return e * e * e + 2.0 * e; },
        [](double e) { return std::atan(e - 10.0); }};
    for (int i = 0; i < 1000; ++i) {
        EpsilonTriple e{u(gen), u(gen), u(gen)};
        if (i % 10 == 0) e.eps_a = e.eps_n;  // include ties
        for (const auto& f : transforms) EXPECT_EQ(decide({f(e.eps_d), f(e.eps_n), f(e.eps_a)}), decide(e));
    }
}

TEST(Epsilons, PerfectModelGivesZero) {
    auto s = transparent_sensor();
    const auto x = std::vector<double>{0.0, 0.7, 0.2, 0.0, 1.0, 2.0, 3.0};
    const auto e = epsilons(s, x);
    EXPECT_EQ(e.eps_d, 0.0);
    EXPECT_DOUBLE_EQ(e.eps_n, 0.7);
    EXPECT_DOUBLE_EQ(e.eps_a, 0.2);
    EXPECT_EQ(classify(s, x).label, BehaviorClass::drowsy);
}

TEST(Epsilons, TargetUsesEachClassExponent) {
    auto s = transparent_sensor();
    // Every model returns 0 when x0..x2 vanish; epsilons are then the targets.
    const std::vector<double> x = {0.0, 0.0, 0.0, -3.0, 0.0, 0.0, 0.0};
    const auto e = epsilons(s, x);
    EXPECT_DOUBLE_EQ(e.eps_d, std::pow(3.0, 1.1));
    EXPECT_DOUBLE_EQ(e.eps_n, std::pow(3.0, 1.01));
    EXPECT_DOUBLE_EQ(e.eps_a, std::pow(3.0, 1.001));
}

TEST(Epsilons, PureAcrossRepeatedCalls) {
    const auto& fr = fixture_fit();
    const auto fx = generate_fixture(7);
    const auto x = fx.test[1].rows.row(5);
    const auto a = epsilons(fr.sensor, x);
    const auto b = epsilons(fr.sensor, x);
    (void)epsilons(fr.sensor, fx.test[0].rows.row(3));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, epsilons(fr.sensor, x));
}

TEST(Epsilons, RowChecks) {
    const auto s = transparent_sensor();
    EXPECT_THROW(epsilons(s, std::vector<double>(8, 0.0)), DataError);
    auto bad = row_with_eps(1, 2, 3);
    bad[5] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(epsilons(s, bad), DataError);
}

TEST(Fit, InsufficientAndMissingClassData) {
    auto fx = generate_fixture(1);
    auto one = fx.train;
    one[1] = FeatureMatrix::empty_of(Variant::B);
    one[1].append(0.0, fx.train[1].rows.row(0), BehaviorClass::normal);
    try {
        fit(one, SensorConfig{});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient class data"), std::string::npos);
    }
    auto missing = fx.train;
    missing[2] = FeatureMatrix::empty_of(Variant::B);
    try {
        fit(missing, SensorConfig{});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("aggressive"), std::string::npos);
    }
    SensorConfig a_cfg;
    a_cfg.variant = Variant::A;
    EXPECT_THROW(fit(fx.train, a_cfg), DataError);
}

TEST(Fit, SyntheticManifoldsSeparateByTwoOrdersOfMagnitude) {
    const auto& fr = fixture_fit();
    const auto fx = generate_fixture(7);
    for (auto c : kAllClasses) {
        std::array<double, 3> mean{};
        const auto& m = fx.train[index_of(c)];
        for (std::size_t r = 0; r < m.size(); ++r) {
            const auto e = epsilons(fr.sensor, m.rows.row(r));
            for (auto k : kAllClasses) mean[index_of(k)] += e[k] / static_cast<double>(m.size());
        }
        for (auto k : kAllClasses)
            if (k != c) {
                EXPECT_LT(mean[index_of(c)], mean[index_of(k)] / 100.0) << to_string(c) << " vs " << to_string(k);
            }
    }
}

TEST(Fit, TrainingDataTprAtLeast99Percent) {
    const auto& fr = fixture_fit();
    const auto fx = generate_fixture(7);
    ConfusionMatrix cm;
    for (auto c : kAllClasses)
        for (std::size_t r = 0; r < fx.train[index_of(c)].size(); ++r)
            cm.add(c, classify(fr.sensor, fx.train[index_of(c)].rows.row(r)).label);
    for (const auto& m : class_metrics(cm)) EXPECT_GE(*m.tpr.value(), 0.99);
}

TEST(Fit, BankAndModelsWellFormed) {
    const auto& fr = fixture_fit();
    EXPECT_NO_THROW(fr.sensor.validate());
    const auto& b = fr.sensor.bank;
    for (const auto* pc : {&b.p1d, &b.p1n, &b.p1a, &b.p1t}) {
        ASSERT_EQ(pc->axis.size(), 7u);
        EXPECT_NEAR(dot(pc->axis, pc->axis), 1.0, 1e-10);
    }
    for (const auto& r : fr.report.classes) {
        EXPECT_GE(r.rules, 1u);
        double prev = r.initial_mse;
        for (double l : r.loss_trace) {
            EXPECT_LE(l, prev);
            prev = l;
        }
    }
}

TEST(Fit, RefitIsIdentical) {
    const auto fx = generate_fixture(3);
    const auto a = fit(fx.train, SensorConfig{});
    const auto b = fit(fx.train, SensorConfig{});
    EXPECT_EQ(a.sensor, b.sensor);
}

TEST(Fit, LabeledMatrixOverloadMatchesPerClass) {
    const auto fx = generate_fixture(2);
    auto pooled = FeatureMatrix::empty_of(Variant::B);
    for (const auto& m : fx.train) pooled.append_all(m);
    EXPECT_EQ(fit(pooled, SensorConfig{}).sensor, fit(fx.train, SensorConfig{}).sensor);
}

TEST(Stream, WindowOneMatchesClassify) {
    const auto& fr = fixture_fit();
    const auto fx = generate_fixture(7);
    std::vector<std::vector<double>> rows;
    for (const auto& m : fx.test)
        for (std::size_t r = 0; r < 30; ++r) rows.emplace_back(m.rows.row(r).begin(), m.rows.row(r).end());
    const auto res = classify_stream(fr.sensor, rows, 1);
    ASSERT_EQ(res.entries.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto d = classify(fr.sensor, rows[i]);
        EXPECT_EQ(res.entries[i].out.label, d.label);
        EXPECT_EQ(res.entries[i].out.smoothed, d.eps);
    }
}

TEST(Stream, ConstantEpsilonsGiveConstantClass) {
    const auto s = transparent_sensor();
    const std::vector<std::vector<double>> rows(12, row_with_eps(4.0, 1.5, 2.0));
    for (std::size_t w : {1u, 2u, 5u, 40u})
        for (const auto& e : classify_stream(s, rows, w).entries) EXPECT_EQ(e.out.label, BehaviorClass::normal);
}

TEST(Stream, LargeWindowFollowsLowerMeanEpsilon) {
    const auto s = transparent_sensor();
    // Per sample the winner alternates drowsy / normal; drowsy has the lower mean (2.5 vs 2.75).
    const std::vector<double> d = {1, 4, 1, 4, 1, 4};
    const std::vector<double> n = {3, 2.5, 3, 2.5, 3, 2.5};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < 6; ++i) rows.push_back(row_with_eps(d[i], n[i], 10.0));

    const auto raw = classify_stream(s, rows, 1);
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_EQ(raw.entries[i].out.label, i % 2 == 0 ? BehaviorClass::drowsy : BehaviorClass::normal);

    const auto smooth = classify_stream(s, rows, 6);
    // Trailing means: d = 1, 2.5, 2, 2.5, 2.2, 2.5 and n = 3, 2.75, 2.8333, 2.75, 2.8, 2.75.
    const std::vector<double> md = {1, 2.5, 2, 2.5, 2.2, 2.5};
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(smooth.entries[i].out.label, BehaviorClass::drowsy);
        EXPECT_NEAR(smooth.entries[i].out.smoothed.eps_d, md[i], 1e-12);
    }
    EXPECT_NEAR(smooth.entries[5].out.smoothed.eps_n, 2.75, 1e-12);

    // A window of 2 averages one sample of each kind: 2.5 vs 2.75 after the first row.
    const auto pairwise = classify_stream(s, rows, 2);
    for (std::size_t i = 1; i < 6; ++i) EXPECT_EQ(pairwise.entries[i].out.label, BehaviorClass::drowsy);
}

TEST(Stream, InvalidRowsAreFlaggedAndCountsAddUp) {
    const auto s = transparent_sensor();
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) rows.push_back(row_with_eps(1.0 + i, 2.0, 3.0));
    rows[4][1] = std::numeric_limits<double>::infinity();
    rows[9].pop_back();
    rows[13][6] = std::numeric_limits<double>::quiet_NaN();
    const auto res = classify_stream(s, rows, 3);
    EXPECT_EQ(res.flagged, (std::vector<std::size_t>{4, 9, 13}));
    EXPECT_EQ(res.entries.size() + res.flagged.size(), rows.size());
    EXPECT_THROW(classify_stream(s, rows, 0), UsageError);
}

TEST(Exponents, Validation) {
    WeightedExponents w;
    EXPECT_TRUE(w.distinct());
    EXPECT_EQ(w.for_class(BehaviorClass::drowsy), 1.1);
    EXPECT_EQ(w.for_class(BehaviorClass::normal), 1.01);
    EXPECT_EQ(w.for_class(BehaviorClass::aggressive), 1.001);
    w.a2 = w.a1;
    EXPECT_FALSE(w.distinct());
    w.a3 = 0.0;
    EXPECT_THROW(w.validate(), UsageError);
}
