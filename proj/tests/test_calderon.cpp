#include "oracles.hpp"

#include "vh/calderon.hpp"
#include "vh/corpus.hpp"
#include "vh/errors.hpp"
#include "vh/maximal.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vh;

namespace {

struct Fixture {
    Grid grid = make_grid(8.0, 10);
    FilterBank bank = build_filterbank(grid, 2, -3, 3, 3);
    CubeLattice lattice = build_lattice(grid, 2, -3, 3);
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

// Two band-limited bumps inside the covered band.
SampledFunction band_limited(const Grid& g) { return psi_bump(g, 0, 0.5) + 0.7 * psi_bump(g, 2, -1.0); }


} // namespace

TEST(Analyze, ZeroFunction) {
    const auto c = analyze(SampledFunction(fx().grid), fx().bank, fx().lattice);
    EXPECT_EQ(c.energy(), 0.0);
}

TEST(Analyze, SamplesFilteredFunctionAtCenters) {
    const auto f = band_limited(fx().grid);
    const auto c = analyze(f, fx().bank, fx().lattice);
    for (int j = -3; j <= 3; ++j) {
        const auto field = fx().bank.convolve(f, FilterKind::Psi, j);
        const auto cubes = fx().lattice.cubes(j);
        for (std::size_t q = 0; q < cubes.size(); ++q) ASSERT_EQ(c.at(j, q), field[cubes[q].center_sample]);
    }
}

TEST(Analyze, EnergyConcentratesNearBumpScale) {
    for (int j0 : {-1, 1, 2}) {
        const auto c = analyze(psi_bump(fx().grid, j0, 0.25), fx().bank, fx().lattice);
        double near = 0.0, total = 0.0;
        for (int j = -3; j <= 3; ++j) {
            double e = 0.0;
            for (double v : c.scale(j)) e += v * v;
            total += e;
            if (std::abs(j - j0) <= 1) near += e;
        }
        EXPECT_GE(near / total, 0.9) << j0;
    }
}

TEST(Analyze, Linearity) {
    oracle::Rng rng(51);
    const auto f = oracle::random_bumps(fx().grid, rng);
    const auto u = oracle::random_bumps(fx().grid, rng);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const auto cf = analyze(f, fx().bank, fx().lattice);
    const auto cu = analyze(u, fx().bank, fx().lattice);
    const auto cs = analyze(a * f + b * u, fx().bank, fx().lattice);
    for (int j = -3; j <= 3; ++j)
        for (std::size_t q = 0; q < cs.scale(j).size(); ++q)
            ASSERT_NEAR(cs.at(j, q), a * cf.at(j, q) + b * cu.at(j, q), 1e-11);
}

TEST(Analyze, MismatchedLatticeThrows) {
    const auto other = build_lattice(fx().grid, 2, -2, 3);
    EXPECT_THROW(analyze(SampledFunction(fx().grid), fx().bank, other), ConfigError);
}

TEST(Synthesize, ReconstructsBandLimitedFunction) {
    const auto f = band_limited(fx().grid);
    ASSERT_GE(fx().bank.band_energy_fraction(f), 0.999);
    const auto back = synthesize(analyze(f, fx().bank, fx().lattice));
    EXPECT_LT(relative_l2_error(back, f), 1e-3);
}

TEST(Synthesize, ZeroField) {
    CoefficientField c(fx().bank, fx().lattice);
    EXPECT_TRUE(synthesize(c).is_zero());
}

TEST(Synthesize, SingleCoefficientIsScaledFilter) {
    // Coarser scales pick up periodic images of the slow psi tail.
    for (int j : {1, 2}) {
        CoefficientField c(fx().bank, fx().lattice);
        const auto cubes = fx().lattice.cubes(j);
        const std::size_t q = cubes.size() / 2 + 1;
        c.scale(j)[q] = 1.0;
        const auto out = synthesize(c);
        const auto expected = cubes[q].side * psi_bump(fx().grid, j, cubes[q].center);
        // Interior comparison: both sides carry periodic images at different periods.
        double err = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (std::abs(fx().grid.point(i) - cubes[q].center) <= 4.0)
                err = std::max(err, std::abs(out[i] - expected[i]));
        EXPECT_LT(err, 1e-5 * expected.sup_norm()) << j;
    }
}

TEST(Reconstruction, ErrorBoundedByOutOfBandEnergy) {
    const auto p = ExponentFunction::smoothstep(fx().grid, 0.7, 1.0, -2.0, 2.0);
    for (const auto& m : make_corpus(fx().grid, 10, 1)) {
        if (m.f.is_zero()) continue;
        const double outside = 1.0 - fx().bank.band_energy_fraction(m.f);
        const auto back = synthesize(analyze(m.f, fx().bank, fx().lattice));
        EXPECT_LE(relative_l2_error(back, m.f), 2.0 * std::sqrt(std::max(outside, 0.0)) + 1e-6) << m.name;
        if (outside < 1e-10) {
            EXPECT_LT(relative_l2_error(back, m.f), 1e-3) << m.name;
            EXPECT_LT(std::abs(modular(back - m.f, p, luxemburg_norm(m.f, p))), 1e-2) << m.name;
        }
    }
}

TEST(SquareFunction, ZeroAndHomogeneity) {
    EXPECT_TRUE(square_function_G(SampledFunction(fx().grid), fx().bank).is_zero());
    EXPECT_TRUE(square_function_Gd(SampledFunction(fx().grid), fx().bank, fx().lattice).is_zero());
    oracle::Rng rng(52);
    const auto f = oracle::random_bumps(fx().grid, rng);
    const double c = -2.5;
    const auto g1 = square_function_G(f, fx().bank);
    const auto g2 = square_function_G(c * f, fx().bank);
    const auto d1 = square_function_Gd(f, fx().bank, fx().lattice);
    const auto d2 = square_function_Gd(c * f, fx().bank, fx().lattice);
    for (std::size_t i = 0; i < f.size(); ++i) {
        ASSERT_NEAR(g2[i], std::abs(c) * g1[i], 1e-12 * (1 + g1[i]));
        ASSERT_NEAR(d2[i], std::abs(c) * d1[i], 1e-12 * (1 + d1[i]));
    }
}

TEST(SquareFunction, PlancherelForBandLimited) {
    const auto f = band_limited(fx().grid);
    EXPECT_NEAR(square_function_G(f, fx().bank).l2_norm() / f.l2_norm(), 1.0, 1e-3);
}

TEST(SquareFunction, PointwiseAgainstFilteredFields) {
    oracle::Rng rng(53);
    const auto f = oracle::random_bumps(fx().grid, rng);
    const auto G = square_function_G(f, fx().bank);
    const auto Gd = square_function_Gd(f, fx().bank, fx().lattice);
    std::vector<double> g2(f.size(), 0.0), gd2(f.size(), 0.0);
    for (int j = -3; j <= 3; ++j) {
        const auto field = fx().bank.convolve(f, FilterKind::Psi, j);
        for (std::size_t i = 0; i < f.size(); ++i) {
            g2[i] += field[i] * field[i];
            const auto& cube = fx().lattice.cubes(j)[fx().lattice.cube_of_sample(j, i)];
            gd2[i] += field[cube.center_sample] * field[cube.center_sample];
        }
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        ASSERT_NEAR(G[i], std::sqrt(g2[i]), 1e-12 * (1 + G[i]));
        ASSERT_NEAR(Gd[i], std::sqrt(gd2[i]), 1e-12 * (1 + Gd[i]));
    }
}

TEST(HardyNorm, ZeroAndHomogeneity) {
    const auto p = ExponentFunction::smoothstep(fx().grid, 0.7, 1.0, -2.0, 2.0);
    for (auto method : {HardyMethod::SmoothMaximal, HardyMethod::DiscreteSquare}) {
        EXPECT_EQ(hardy_norm(SampledFunction(fx().grid), p, fx().bank, fx().lattice, method), 0.0);
        const auto f = band_limited(fx().grid);
        const double base = hardy_norm(f, p, fx().bank, fx().lattice, method);
        for (double c : {0.5, 3.0})
            EXPECT_LT(oracle::relative(hardy_norm(c * f, p, fx().bank, fx().lattice, method), c * base), 1e-6);
    }
}

TEST(HardyNorm, EquivalenceRatioStableUnderRefinement) {
    double lo[2], hi[2];
    int slot = 0;
    for (int L : {10, 12}) {
        const Grid g = make_grid(8.0, L);
        const auto bank = build_filterbank(g, 2, -3, 3, 3);
        const auto lat = build_lattice(g, 2, -3, 3);
        const auto p = ExponentFunction::smoothstep(g, 0.7, 1.0, -2.0, 2.0);
        lo[slot] = INFINITY;
        hi[slot] = 0.0;
        for (const auto& m : make_corpus(g, 10, 1)) {
            if (m.f.is_zero()) continue;
            const double r = hardy_norm(m.f, p, bank, lat, HardyMethod::DiscreteSquare) /
                             hardy_norm(m.f, p, bank, lat, HardyMethod::SmoothMaximal);
            lo[slot] = std::min(lo[slot], r);
            hi[slot] = std::max(hi[slot], r);
        }
        ++slot;
    }
    const double c0 = std::max(hi[0], 1.0 / lo[0]), c1 = std::max(hi[1], 1.0 / lo[1]);
    EXPECT_TRUE(std::isfinite(c0));
    EXPECT_LT(std::max(c0, c1) / std::min(c0, c1), 2.0);
}

TEST(BandProjection, IdempotentOnBandLimited) {
    // Window truncation of a fine bump leaks only slightly out of band.
    const auto f = psi_bump(fx().grid, 2, 0.5);
    EXPECT_LT(relative_l2_error(band_projection(f, fx().bank), f), 1e-6);
    const auto once = band_projection(band_limited(fx().grid), fx().bank);
    EXPECT_LT(relative_l2_error(band_projection(once, fx().bank), once), 1e-4);
}
