#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fispca/fis.hpp"

#include "oracles.hpp"

using namespace fispca;
using oracle::brute_force;

namespace {

TSModel random_model(std::mt19937_64& gen, std::size_t n_inputs, std::size_t n_rules) {
    std::uniform_real_distribution<double> c(-2.0, 2.0), w(0.2, 2.0), g(-3.0, 3.0);
    std::vector<Rule> rules;
    for (std::size_t j = 0; j < n_rules; ++j) {
        Rule r;
        for (std::size_t i = 0; i < n_inputs; ++i) r.antecedents.push_back({c(gen), w(gen)});
        for (std::size_t i = 0; i <= n_inputs; ++i) r.consequent.push_back(g(gen));
        rules.push_back(r);
    }
    return TSModel(n_inputs, rules);
}

}  // namespace

TEST(Membership, PeakAndOneSigma) {
    const GaussianMF mf{1.5, 0.3};
    EXPECT_EQ(membership(mf, 1.5), 1.0);
    EXPECT_NEAR(membership(mf, 1.8), 0.6065306597126334, 1e-12);
    EXPECT_NEAR(membership(mf, 1.8), std::exp(-0.5), 1e-15);
}

TEST(Membership, EvenAroundCenter) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
        const GaussianMF mf{u(gen), 0.1 + std::abs(u(gen))};
        const double d = u(gen);
        EXPECT_NEAR(membership(mf, mf.center + d), membership(mf, mf.center - d), 1e-15);
        const double m = membership(mf, u(gen));
        EXPECT_GE(m, 0.0);
        EXPECT_LE(m, 1.0);
    }
}

TEST(FiringStrength, ProductOfMemberships) {
    Rule r{{{0.0, 1.0}, {2.0, 0.5}}, {0.0, 0.0, 0.0}};
    EXPECT_EQ(firing_strength(r, std::vector<double>{0.0, 2.0}), 1.0);
    EXPECT_NEAR(firing_strength(r, std::vector<double>{0.0, 2.5}), std::exp(-0.5), 1e-15);
    EXPECT_THROW(firing_strength(r, std::vector<double>{0.0}), DataError);
}

TEST(FiringStrength, NonIncreasingAwayFromCenter) {
    Rule r{{{0.3, 0.7}, {-1.0, 1.2}, {2.0, 0.4}}, {0.0, 0.0, 0.0, 0.0}};
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> x = {0.3, -1.0, 2.0};
        double prev = firing_strength(r, x);
        for (int k = 1; k <= 50; ++k) {
            x[i] = r.antecedents[i].center + 0.1 * k;
            const double w = firing_strength(r, x);
            EXPECT_LE(w, prev);
            prev = w;
        }
    }
}

TEST(Infer, SingleRuleIgnoresAntecedent) {
    const TSModel m(1, {Rule{{{-4.0, 0.2}}, {2.0, 3.0}}});
    EXPECT_DOUBLE_EQ(infer(m, std::vector<double>{1.0}), 5.0);
}

TEST(Infer, EqualFiringGivesMidpoint) {
    const TSModel m(1, {Rule{{{-1.0, 1.0}}, {0.0, 0.0}}, Rule{{{1.0, 1.0}}, {10.0, 0.0}}});
    EXPECT_DOUBLE_EQ(infer(m, std::vector<double>{0.0}), 5.0);
}

TEST(Infer, MatchesBruteForceOracle) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto m = random_model(gen, 1 + trial % 3, 3);
        std::vector<double> x(m.n_inputs());
        for (auto& v : x) v = u(gen);
        const double oracle = brute_force(m, x);
        EXPECT_NEAR(infer(m, x), oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
    }
}

TEST(Infer, ConvexCombinationOfRuleOutputs) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto m = random_model(gen, 2, 1 + trial % 4);
        const std::vector<double> x = {u(gen), u(gen)};
        double lo = 1e300, hi = -1e300;
        for (const auto& r : m.rules()) lo = std::min(lo, r.output(x)), hi = std::max(hi, r.output(x));
        const double y = infer(m, x);
        EXPECT_GE(y, lo - 1e-12 * std::abs(lo));
        EXPECT_LE(y, hi + 1e-12 * std::abs(hi));
    }
}

TEST(Infer, ScalingAllWeightsLeavesOutputUnchanged) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.01, 1.0), g(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> w(4), f(4), scaled(4);
        for (std::size_t j = 0; j < 4; ++j) w[j] = u(gen), f[j] = g(gen);
        const double lambda = std::pow(10.0, g(gen));
        for (std::size_t j = 0; j < 4; ++j) scaled[j] = lambda * w[j];
        EXPECT_NEAR(defuzzify(scaled, f), defuzzify(w, f), 1e-12);
    }
    // Constant-consequent single-rule models: any common width change cancels exactly.
    const TSModel a(1, {Rule{{{0.0, 1.0}}, {7.0, 0.0}}});
    const TSModel b(1, {Rule{{{0.0, 3.0}}, {7.0, 0.0}}});
    EXPECT_EQ(infer(a, std::vector<double>{0.4}), infer(b, std::vector<double>{0.4}));
}

TEST(Infer, ContinuousUnderTinyPerturbation) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = random_model(gen, 3, 3);
        std::vector<double> x = {u(gen), u(gen), u(gen)};
        auto y = x;
        for (auto& v : y) v += 1e-8;
        // Rule outputs and normalized weights have bounded slopes on this box.
        EXPECT_LT(std::abs(infer(m, x) - infer(m, y)), 1e-5);
    }
}

TEST(Infer, UnderflowFallsBackToNearestRule) {
    const TSModel m(1, {Rule{{{0.0, 0.01}}, {1.0, 0.0}}, Rule{{{10.0, 0.01}}, {2.0, 0.0}}});
    const auto far_right = forward(m, std::vector<double>{1000.0});
    EXPECT_EQ(far_right.fallback_rule, 1);
    EXPECT_EQ(far_right.output, 2.0);
    EXPECT_EQ(infer(m, std::vector<double>{-1000.0}), 1.0);
    // Exactly between the two centers: tie goes to the lower index.
    const TSModel tie(1, {Rule{{{-500.0, 0.01}}, {1.0, 0.0}}, Rule{{{500.0, 0.01}}, {2.0, 0.0}}});
    EXPECT_EQ(forward(tie, std::vector<double>{0.0}).fallback_rule, 0);
    EXPECT_TRUE(std::isfinite(infer(tie, std::vector<double>{0.0})));
}

TEST(Infer, NoFallbackNearCenters) {
    std::mt19937_64 gen(6);
    const auto m = random_model(gen, 2, 3);
    EXPECT_EQ(forward(m, std::vector<double>{0.0, 0.0}).fallback_rule, -1);
}

TEST(Infer, ArityMismatchIsAnError) {
    const TSModel m(2, {Rule{{{0.0, 1.0}, {0.0, 1.0}}, {0.0, 1.0, 1.0}}});
    EXPECT_THROW(infer(m, std::vector<double>{1.0}), DataError);
    EXPECT_THROW(infer(m, std::vector<double>{1.0, 2.0, 3.0}), DataError);
}

TEST(TSModel, ValidatesConstruction) {
    EXPECT_THROW(TSModel(1, {}), ModelError);
    EXPECT_THROW(TSModel(2, {Rule{{{0.0, 1.0}}, {0.0, 1.0}}}), ModelError);
    EXPECT_THROW(TSModel(1, {Rule{{{0.0, 0.0}}, {0.0, 1.0}}}), ModelError);
    EXPECT_THROW(TSModel(1, {Rule{{{0.0, -1.0}}, {0.0, 1.0}}}), ModelError);
    EXPECT_THROW(TSModel(1, {Rule{{{0.0, 1.0}}, {0.0}}}), ModelError);
}
