#pragma once

// Deterministic synthetic driving data: each behavior is a noisy 1-D affine
// manifold in feature space. Random numbers come from mt19937_64 with a
// hand-rolled uniform/normal transform so output is identical across
// standard libraries.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fispca/behavior.hpp"
#include "fispca/dataset.hpp"

namespace fispca {

class FixtureRng {
public:
    explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (cached_) {
            cached_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        cached_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
    bool cached_ = false;
    double spare_ = 0.0;
};

struct FixtureOptions {
    Variant variant = Variant::B;
    std::size_t rows_per_class = 400;
    double noise = 0.002;  ///< isotropic, relative to the per-column scale
    double rate = 10.0;    ///< timestamp spacing in Hz
};

namespace detail {

// Physical operating point and spread per column: ax ay az fax fay faz [G], v vmax [km/h].
inline constexpr std::array<double, 8> kFixtureBase = {0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 90.0, 100.0};
inline constexpr std::array<double, 8> kFixtureSpread = {0.1, 0.1, 0.05, 0.08, 0.08, 0.04, 20.0, 10.0};

// Offsets and directions of each class manifold, in spread units.
inline constexpr std::array<std::array<double, 8>, kClassCount> kFixtureOffset = {{
    {-1.0, 0.5, 0.0, -0.8, 0.4, 0.2, -1.5, 0.5},
    {0.2, -0.6, 0.4, 0.3, -0.5, 0.0, 0.0, -0.5},
    {1.2, 0.3, -0.5, 1.0, 0.2, -0.4, 1.4, 0.8},
}};
inline constexpr std::array<std::array<double, 8>, kClassCount> kFixtureDirection = {{
    {0.2, 0.1, 0.3, 0.2, 0.1, 0.2, 1.0, 0.1},
    {0.9, 0.2, -0.1, 0.8, 0.2, 0.1, 0.3, 0.2},
    {-0.3, 1.0, 0.2, -0.2, 0.9, 0.3, 0.4, -0.2},
}};

}  // namespace detail

/// `rows_per_class` samples of one behavior; latent position uniform on [-1, 1].
inline FeatureMatrix generate_class(BehaviorClass c, std::uint64_t seed, const FixtureOptions& opt = {}) {
    FixtureRng rng(seed * 3 + index_of(c) + 1);
    auto m = FeatureMatrix::empty_of(opt.variant);
    const std::size_t d = feature_count(opt.variant);
    const auto& off = detail::kFixtureOffset[index_of(c)];
    const auto& dir = detail::kFixtureDirection[index_of(c)];
    std::vector<double> x(d);
    for (std::size_t i = 0; i < opt.rows_per_class; ++i) {
        const double t = rng.uniform(-1.0, 1.0);
        for (std::size_t f = 0; f < d; ++f) {
            const double z = off[f] + t * dir[f] + opt.noise * rng.normal();
            x[f] = detail::kFixtureBase[f] + detail::kFixtureSpread[f] * z;
        }
        m.append(static_cast<double>(i) / opt.rate, x, c);
    }
    return m;
}

struct Fixture {
    std::array<FeatureMatrix, kClassCount> train;
    std::array<FeatureMatrix, kClassCount> test;
};

/// Training and held-out splits drawn from independent streams.
inline Fixture generate_fixture(std::uint64_t seed, const FixtureOptions& opt = {}) {
    Fixture fx;
    for (auto c : kAllClasses) {
        fx.train[index_of(c)] = generate_class(c, 2 * seed, opt);
        fx.test[index_of(c)] = generate_class(c, 2 * seed + 1, opt);
    }
    return fx;
}

}  // namespace fispca
