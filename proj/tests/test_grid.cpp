#include "oracles.hpp"

#include "vh/errors.hpp"
#include "vh/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vh;

TEST(Grid, DeskGridArithmetic) {
    const Grid g = make_grid(8.0, 12);
    EXPECT_EQ(g.size(), 4096u);
    EXPECT_DOUBLE_EQ(g.spacing(), std::ldexp(1.0, -8));
    EXPECT_DOUBLE_EQ(g.point(0), -8.0);
}

TEST(Grid, SmallGrid) {
    const Grid g = make_grid(1.0, 4);
    EXPECT_EQ(g.size(), 16u);
    EXPECT_DOUBLE_EQ(g.point(0), -1.0);
}

TEST(Grid, RejectsBadParameters) {
    EXPECT_THROW(make_grid(8.0, 30), ConfigError);
    EXPECT_THROW(make_grid(8.0, 3), ConfigError);
    EXPECT_THROW(make_grid(0.0, 10), ConfigError);
    EXPECT_THROW(make_grid(-1.0, 10), ConfigError);
}

TEST(Convolution, SpikeReproducesKernel) {
    const Grid g = make_grid(8.0, 10);
    std::vector<double> spike(g.size(), 0.0);
    spike[g.size() / 2] = 1.0 / g.spacing();
    const SampledFunction f(g, spike, g.half_width());
    const auto bump = SampledFunction::sample(g, [](double x) { return std::exp(-x * x); });
    const auto out = convolve_scaled(f, bump, 0);
    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(out[i] - bump[i]));
    EXPECT_LT(dev, 1e-6);
}

TEST(Convolution, ZeroInZeroOut) {
    const Grid g = make_grid(8.0, 10);
    const auto bump = SampledFunction::sample(g, [](double x) { return std::exp(-x * x); });
    const auto out = convolve_scaled(SampledFunction(g), bump, 1);
    EXPECT_TRUE(out.is_zero());
}

TEST(Convolution, BoxWithBoxMatchesDirectQuadrature) {
    const Grid g = make_grid(4.0, 9);
    const auto chi = SampledFunction::sample(g, [](double x) { return x >= 0.0 && x < 1.0 ? 1.0 : 0.0; });
    const auto box = SampledFunction::sample(g, [](double x) { return std::abs(x) < 0.5 ? 1.0 : 0.0; });
    const auto fast = convolve_scaled(chi, box, 0);
    const auto slow = oracle::direct_convolution(chi, box);
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        err = std::max(err, std::abs(fast[i] - slow[i]));
        peak = std::max(peak, fast[i]);
    }
    EXPECT_LT(err, 1e-8);
    EXPECT_NEAR(peak, 1.0, 2.0 * g.spacing());
}

TEST(Convolution, AgreesWithDirectQuadratureOnRandomInputs) {
    oracle::Rng rng(11);
    const Grid g = make_grid(4.0, 10);
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = oracle::random_bumps(g, rng);
        const auto k = oracle::random_bumps(g, rng, 1);
        const auto fast = convolve_scaled(f, k, 0);
        const auto slow = oracle::direct_convolution(f, k);
        for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-8);
    }
}

TEST(Convolution, Linearity) {
    oracle::Rng rng(12);
    const Grid g = make_grid(8.0, 11);
    const auto kernel = SampledFunction::sample(g, [](double x) { return x * std::exp(-x * x); });
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = oracle::random_bumps(g, rng);
        const auto u = oracle::random_bumps(g, rng);
        const double a = rng.uniform(-3.0, 3.0), b = rng.uniform(-3.0, 3.0);
        const int j = rng.integer(-1, 3);
        const auto lhs = convolve_scaled(a * f + b * u, kernel, j);
        const auto rhs = a * convolve_scaled(f, kernel, j) + b * convolve_scaled(u, kernel, j);
        EXPECT_LT((lhs - rhs).l2_norm(), 1e-12 * std::max(1.0, rhs.l2_norm()));
    }
}

TEST(Convolution, UnresolvableScaleThrows) {
    const Grid g = make_grid(8.0, 10);
    const auto f = SampledFunction::sample(g, [](double x) { return std::exp(-x * x); });
    EXPECT_THROW(convolve_scaled(f, f, 8), ScaleRangeError);
    EXPECT_THROW(convolve_scaled(f, f, -4), ScaleRangeError);
}

TEST(Lattice, CubeCounts) {
    const Grid g = make_grid(8.0, 12);
    const auto lat = build_lattice(g, 2, -3, 5);
    EXPECT_EQ(lat.cubes(0).size(), 64u);
    EXPECT_DOUBLE_EQ(lat.cubes(0)[0].side, 0.25);
    EXPECT_EQ(lat.cubes(3).size(), 512u);
    EXPECT_EQ(lat.cubes(-3).size(), 8u);
}

TEST(Lattice, TooDeepThrows) {
    const Grid g = make_grid(8.0, 11);
    EXPECT_THROW(build_lattice(g, 2, -3, 5), ConfigError);
    EXPECT_NO_THROW(build_lattice(g, 2, -3, 4));
}

TEST(Lattice, EveryPointInExactlyOneCube) {
    const Grid g = make_grid(8.0, 11);
    const auto lat = build_lattice(g, 2, -3, 4);
    for (int j = lat.j_min(); j <= lat.j_max(); ++j) {
        std::vector<int> hits(g.size(), 0);
        for (const auto& c : lat.cubes(j)) {
            for (std::size_t i = c.first; i < c.first + c.count; ++i) ++hits[i];
            EXPECT_GE(g.point(c.first), c.left() - 1e-12);
            EXPECT_DOUBLE_EQ(g.point(c.center_sample), c.center);
        }
        for (int h : hits) ASSERT_EQ(h, 1);
        for (std::size_t i = 0; i < g.size(); i += 37) {
            const auto& c = lat.cubes(j)[lat.cube_of_sample(j, i)];
            EXPECT_TRUE(i >= c.first && i < c.first + c.count);
        }
    }
}

TEST(Lattice, ContainmentFromIndices) {
    const Grid g = make_grid(8.0, 11);
    const auto lat = build_lattice(g, 2, -3, 4);
    for (int j = lat.j_min() + 1; j <= lat.j_max(); ++j)
        for (const auto& c : lat.cubes(j)) {
            const auto& parent = lat.ancestor(c, j - 1);
            EXPECT_TRUE(CubeLattice::contains(parent, c));
            EXPECT_LE(parent.left(), c.left());
            EXPECT_GE(parent.left() + parent.side, c.left() + c.side);
            const auto& other = lat.cubes(j - 1)[(lat.position(parent) + 1) % lat.cubes(j - 1).size()];
            EXPECT_FALSE(CubeLattice::contains(other, c));
        }
}

TEST(SampleRange, HalfOpenWindow) {
    const Grid g = make_grid(1.0, 4);
    const auto r = samples_in(g, 0.0, 0.5);
    EXPECT_EQ(r.first, 8u);
    EXPECT_EQ(r.count, 4u);
}
