#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fispca/pca.hpp"

#include "oracles.hpp"

using namespace fispca;
using oracle::EigenPair;
using oracle::characteristic_eigen;

namespace {

Matrix random_matrix(std::mt19937_64& gen, std::size_t n, std::size_t d, double spread = 1.0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    // Mix independent columns so covariances are far from diagonal.
    Matrix mix(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) mix(i, j) = nd(gen) * (i == j ? 2.0 : spread);
    Matrix X(n, d);
    std::vector<double> z(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (auto& v : z) v = nd(gen);
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += mix(c, k) * z[k] * static_cast<double>(k + 1);
            X(r, c) = acc + 3.0;
        }
    }
    return X;
}

double abs_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return std::abs(s);
}

std::vector<double> scores(const Matrix& Z, const std::vector<double>& axis) {
    std::vector<double> s(Z.rows());
    for (std::size_t r = 0; r < Z.rows(); ++r) s[r] = dot(Z.row(r), axis);
    return s;
}

double sample_variance(const std::vector<double>& s) {
    double m = 0.0;
    for (double v : s) m += v;
    m /= static_cast<double>(s.size());
    double ss = 0.0;
    for (double v : s) ss += (v - m) * (v - m);
    return ss / static_cast<double>(s.size() - 1);
}

}  // namespace

TEST(Standardizer, MeanAndSampleStd) {
    const Matrix X = {{1.0, 10.0}, {2.0, 10.0}, {3.0, 13.0}};
    const auto s = fit_standardizer(X);
    EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(s.mean[1], 11.0);
    EXPECT_DOUBLE_EQ(s.scale[0], 1.0);
    EXPECT_DOUBLE_EQ(s.scale[1], std::sqrt(3.0));
}

TEST(Standardizer, RejectsConstantColumnAndShortInput) {
    const Matrix X = {{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}};
    const std::vector<std::string> names = {"ax", "ay"};
    try {
        fit_standardizer(X, names);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("'ay'"), std::string::npos);
    }
    EXPECT_THROW(fit_standardizer(Matrix{{1.0, 2.0}}), DataError);
}

TEST(Standardizer, InvertUndoesApply) {
    std::mt19937_64 gen(1);
    const auto X = random_matrix(gen, 50, 7);
    const auto s = fit_standardizer(X);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(7);
        for (auto& v : x) v = u(gen);
        const auto back = s.invert(s.apply(x));
        for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(back[k], x[k], 1e-10 * std::max(1.0, std::abs(x[k])));
    }
    EXPECT_THROW(s.apply(std::vector<double>(6, 0.0)), DataError);
}

TEST(Jacobi, DiagonalizesRandomSymmetricMatrices) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t d = 1; d <= 8; ++d) {
        Matrix a(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) a(i, j) = a(j, i) = nd(gen);
        const auto e = jacobi_eigen(a);
        EXPECT_LT(e.sweeps, 100);
        // A v = lambda v for every pair.
        for (std::size_t k = 0; k < d; ++k) {
            const auto v = e.vectors.column(k);
            for (std::size_t i = 0; i < d; ++i) {
                double av = 0.0;
                for (std::size_t j = 0; j < d; ++j) av += a(i, j) * v[j];
                EXPECT_NEAR(av, e.values[k] * v[i], 1e-10);
            }
        }
    }
}

TEST(Pca, AxesOrthonormalAndScoreVarianceMatchesEigenvalue) {
    std::mt19937_64 gen(3);
    for (std::size_t d : {2u, 3u, 5u, 7u, 8u}) {
        const auto Z = random_matrix(gen, 300, d, 0.7);
        const auto res = fit_pca(Z);
        ASSERT_EQ(res.components.size(), d);
        for (std::size_t i = 0; i < d; ++i) {
            const auto& ci = res.components[i];
            for (std::size_t j = 0; j < d; ++j) {
                const double expect = i == j ? 1.0 : 0.0;
                EXPECT_NEAR(dot(ci.axis, res.components[j].axis), expect, 1e-10);
            }
            EXPECT_NEAR(sample_variance(scores(Z, ci.axis)), ci.eigenvalue, 1e-8 * std::max(1.0, ci.eigenvalue));
            EXPECT_GE(ci.eigenvalue, 0.0);
            EXPECT_GE(ci.evr, 0.0);
            EXPECT_LE(ci.evr, 1.0);
            if (i > 0) {
                EXPECT_GE(res.components[i - 1].eigenvalue, ci.eigenvalue);
            }
        }
    }
}

TEST(Pca, MatchesCharacteristicPolynomialOracleInLowDimension) {
    std::mt19937_64 gen(4);
    int checked = 0;
    for (std::size_t d : {1u, 2u, 3u}) {
        for (int trial = 0; trial < 30; ++trial) {
            const auto Z = random_matrix(gen, 120, d, 0.9);
            const auto cov = covariance(Z);
            const auto oracle = characteristic_eigen(cov);
            // Near-degenerate spectra make eigenvectors ill-defined; skip them.
            bool separated = true;
            for (std::size_t k = 1; k < oracle.size(); ++k)
                if (oracle[k - 1].value - oracle[k].value < 1e-3 * oracle[0].value) separated = false;
            if (!separated) continue;
            const auto res = fit_pca(Z);
            for (std::size_t k = 0; k < d; ++k) {
                EXPECT_NEAR(res.components[k].eigenvalue, oracle[k].value, 1e-8 * std::max(1.0, oracle[0].value));
                EXPECT_NEAR(abs_dot(res.components[k].axis, oracle[k].vector), 1.0, 1e-8);
                for (std::size_t i = 0; i < d; ++i)
                    EXPECT_NEAR(std::abs(res.components[k].axis[i]), std::abs(oracle[k].vector[i]), 1e-8);
            }
            ++checked;
        }
    }
    EXPECT_GT(checked, 60);
}

TEST(Pca, SpectrumNinePointSixAndPointFourSelectsOneComponent) {
    const std::vector<double> eig = {9.6, 0.4};
    EXPECT_EQ(select_component_count(eig, 0.95), 1u);

    // Four points along rotated axes with covariance eigenvalues exactly 9.6 and 0.4.
    const double a = std::sqrt(14.4);
    const double b = std::sqrt(0.6);
    const double c = std::cos(0.3), s = std::sin(0.3);
    Matrix Z(0, 2);
    for (const auto& [u, v] : {std::pair{a, 0.0}, std::pair{-a, 0.0}, std::pair{0.0, b}, std::pair{0.0, -b}})
        Z.append_row(std::vector<double>{c * u - s * v + 1.0, s * u + c * v - 2.0});
    const auto res = fit_pca(Z, 0.95);
    EXPECT_EQ(res.selected, 1u);
    EXPECT_NEAR(res.components[0].eigenvalue, 9.6, 1e-12);
    EXPECT_NEAR(res.components[1].eigenvalue, 0.4, 1e-12);
    EXPECT_NEAR(res.components[0].evr, 0.96, 1e-12);
    EXPECT_NEAR(abs_dot(res.components[0].axis, {c, s}), 1.0, 1e-12);
}

TEST(Pca, ComponentCountSelection) {
    const std::vector<double> eig = {5.0, 3.0, 1.5, 0.5};
    EXPECT_EQ(select_component_count(eig, 0.5), 1u);
    EXPECT_EQ(select_component_count(eig, 0.8), 2u);
    EXPECT_EQ(select_component_count(eig, 0.95), 3u);
    EXPECT_EQ(select_component_count(eig, 1.0), 4u);
    EXPECT_THROW(select_component_count(std::vector<double>{0.0, 0.0}, 0.9), DataError);
}

TEST(Pca, SignConventionIsDeterministic) {
    std::mt19937_64 gen(6);
    const auto Z = random_matrix(gen, 100, 4);
    Matrix neg(Z.rows(), Z.cols());
    for (std::size_t r = 0; r < Z.rows(); ++r)
        for (std::size_t c = 0; c < Z.cols(); ++c) neg(r, c) = -Z(r, c);
    const auto a = fit_pca(Z);
    const auto b = fit_pca(neg);
    for (const auto& pc : a.components) {
        const auto it = std::max_element(pc.axis.begin(), pc.axis.end(),
                                          [](double x, double y) { return std::abs(x) < std::abs(y); });
        EXPECT_GT(*it, 0.0);
    }
    for (std::size_t k = 0; k < a.components.size(); ++k)
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.components[k].axis[i], b.components[k].axis[i], 1e-9);
}

TEST(Pca, KeepsAtMostNMinusOneComponents) {
    const Matrix Z = {{1.0, 2.0, 3.0}, {2.0, 1.0, 5.0}};
    const auto res = fit_pca(Z);
    EXPECT_EQ(res.components.size(), 1u);
    EXPECT_EQ(res.selected, 1u);
    EXPECT_NEAR(res.components[0].evr, 1.0, 1e-12);
}

TEST(Pca, InputChecks) {
    EXPECT_THROW(fit_pca(Matrix{{1.0, 2.0}}), DataError);
    EXPECT_THROW(fit_pca(Matrix{{1.0, 2.0}, {1.0, 2.0}}), DataError);
    EXPECT_THROW(fit_pca(Matrix{{1.0, 2.0}, {2.0, std::nan("")}}), DataError);
    EXPECT_THROW(fit_pca(Matrix{{1.0, 2.0}, {2.0, 3.0}}, 0.0), UsageError);
}

TEST(Projection, ScoreOfStandardizedVector) {
    const Standardizer s{{1.0, 2.0}, {2.0, 4.0}};
    const PrincipalComponent pc{{0.6, 0.8}, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(project(std::vector<double>{3.0, 6.0}, pc, s), 0.6 * 1.0 + 0.8 * 1.0);
    EXPECT_THROW(project(std::vector<double>{3.0}, pc, s), DataError);
    const Matrix X = {{1.0, 2.0}, {3.0, 6.0}};
    const auto v = project(X, pc, s);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_DOUBLE_EQ(v[1], 1.4);
}
