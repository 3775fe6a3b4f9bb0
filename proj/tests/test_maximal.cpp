#include "oracles.hpp"

#include "vh/errors.hpp"
#include "vh/filterbank.hpp"
#include "vh/maximal.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vh;

namespace {

SampledFunction gaussian(const Grid& g, double s = 1.0) {
    return SampledFunction::sample(g, [=](double x) { return std::exp(-x * x / (s * s)); });
}

// Probability density with unit integral on the grid.
SampledFunction unit_bump(const Grid& g) {
    auto b = gaussian(g, 0.5);
    return b * (1.0 / b.integral());
}

// Window averages over every ladder length and every start covering the sample.
std::vector<double> ladder_brute_force(const SampledFunction& f, const MaximalConfig& cfg) {
    const std::size_t M = f.size();
    std::vector<double> out(M, 0.0);
    for (std::size_t w : cfg.window_lengths)
        for (std::size_t s = 0; s + w <= M; ++s) {
            double avg = 0.0;
            for (std::size_t i = s; i < s + w; ++i) avg += std::abs(f[i]);
            avg /= static_cast<double>(w);
            for (std::size_t i = s; i < s + w; ++i) out[i] = std::max(out[i], avg);
        }
    return out;
}

} // namespace

TEST(Ladder, CoversRadiiWithRatioTwo) {
    const Grid g = make_grid(8.0, 10);
    const auto cfg = MaximalConfig::ladder(g, 3.0);
    const auto r = cfg.radii(g);
    ASSERT_FALSE(r.empty());
    EXPECT_LE(r.front(), 2.0 * g.spacing());
    EXPECT_LE(r.back(), 3.0);
    EXPECT_GT(2.0 * r.back(), 3.0);
    for (std::size_t k = 1; k < r.size(); ++k) EXPECT_LE(r[k] / r[k - 1], 2.0 + 1e-12);
}

TEST(HardyLittlewood, ZeroInZeroOut) {
    const Grid g = make_grid(8.0, 9);
    EXPECT_TRUE(hl_maximal(SampledFunction(g), MaximalConfig::full(g)).is_zero());
}

TEST(HardyLittlewood, MatchesWindowBruteForce) {
    oracle::Rng rng(31);
    const Grid g = make_grid(4.0, 8);
    const auto cfg = MaximalConfig::full(g);
    for (int trial = 0; trial < 4; ++trial) {
        const auto f = oracle::random_bumps(g, rng);
        const auto fast = hl_maximal(f, cfg);
        const auto slow = ladder_brute_force(f, cfg);
        for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-12 * (1.0 + slow[i]));
    }
}

TEST(HardyLittlewood, WithinFactorTwoOfAllIntervals) {
    oracle::Rng rng(32);
    const Grid g = make_grid(4.0, 7);
    const auto f = oracle::random_bumps(g, rng);
    const auto ladder = hl_maximal(f, MaximalConfig::full(g));
    const auto all = oracle::maximal_all_intervals(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_LE(ladder[i], all[i] + 1e-12);
        EXPECT_GE(2.0 * ladder[i], all[i] - 1e-12);
    }
}

TEST(HardyLittlewoodProperty, SublinearScalingMonotone) {
    oracle::Rng rng(33);
    const Grid g = make_grid(8.0, 10);
    const auto cfg = MaximalConfig::full(g);
    for (int trial = 0; trial < 6; ++trial) {
        const auto f = oracle::random_bumps(g, rng);
        const auto u = oracle::random_bumps(g, rng);
        const auto mf = hl_maximal(f, cfg);
        const auto mu = hl_maximal(u, cfg);
        const auto msum = hl_maximal(f + u, cfg);
        for (std::size_t i = 0; i < g.size(); ++i) ASSERT_LE(msum[i], mf[i] + mu[i] + 1e-10);

        const double c = rng.uniform(-4.0, 4.0);
        const auto mc = hl_maximal(c * f, cfg);
        for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(mc[i], std::abs(c) * mf[i], 1e-12 * (1.0 + mf[i]));

        const auto dominated = f.abs() * 0.5 + SampledFunction(g);
        const auto md = hl_maximal(dominated, cfg);
        const auto mabs = hl_maximal(f.abs(), cfg);
        for (std::size_t i = 0; i < g.size(); ++i) ASSERT_LE(md[i], mabs[i] + 1e-12);
    }
}

TEST(SmoothMaximal, ZeroInZeroOut) {
    const Grid g = make_grid(8.0, 9);
    EXPECT_TRUE(smooth_maximal(SampledFunction(g), unit_bump(g), -2, 2).is_zero());
}

TEST(SmoothMaximal, SelfConvolutionAtOrigin) {
    const Grid g = make_grid(8.0, 10);
    const auto phi = unit_bump(g);
    const auto m = smooth_maximal(phi, phi, 0, 0);
    const double self = oracle::direct_convolution(phi, phi)[g.size() / 2];
    EXPECT_GT(self, 0.0);
    EXPECT_GE(m[g.size() / 2], self - 1e-10);
}

TEST(SmoothMaximal, RequiresUnitIntegral) {
    const Grid g = make_grid(8.0, 9);
    EXPECT_THROW(smooth_maximal(gaussian(g), gaussian(g), 0, 1), PreconditionError);
}

TEST(SmoothMaximal, UnresolvableScalePropagates) {
    const Grid g = make_grid(8.0, 9);
    EXPECT_THROW(smooth_maximal(gaussian(g), unit_bump(g), 0, 9), ScaleRangeError);
}

TEST(SmoothMaximal, DominatedByHardyLittlewood) {
    const Grid g = make_grid(8.0, 10);
    const auto f = gaussian(g);
    const auto ms = smooth_maximal(f, unit_bump(g), -1, 4);
    const auto mh = hl_maximal(f, MaximalConfig::full(g));
    const double c = pointwise_ratio_sup(ms, mh);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GT(c, 0.0);
    EXPECT_LT(c, 4.0);
}

TEST(SmoothMaximal, BankVariantDominatedByHardyLittlewood) {
    const Grid g = make_grid(8.0, 10);
    const auto bank = build_filterbank(g, 2, -3, 3, 3);
    oracle::Rng rng(34);
    const auto f = oracle::random_bumps(g, rng);
    const double c = pointwise_ratio_sup(smooth_maximal(f, bank), hl_maximal(f, MaximalConfig::full(g)));
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_LT(c, 10.0);
}

TEST(VectorMaximal, ZeroFamilyIsVacuous) {
    const Grid g = make_grid(8.0, 9);
    const std::vector<SampledFunction> family{SampledFunction(g), SampledFunction(g)};
    const auto r = fs_vector_check(family, 2.0, ExponentFunction::constant(g, 2.0), MaximalConfig::full(g));
    EXPECT_TRUE(r.vacuous);
    EXPECT_EQ(r.ratio, 0.0);
}

TEST(VectorMaximal, SingleIndicatorIsScalarRatio) {
    const Grid g = make_grid(8.0, 9);
    const auto chi = SampledFunction::sample(g, [](double x) { return x >= 0 && x < 1 ? 1.0 : 0.0; });
    const auto cfg = MaximalConfig::full(g);
    const std::vector<SampledFunction> family{chi};
    const auto r = fs_vector_check(family, 2.0, ExponentFunction::constant(g, 2.0), cfg);
    const auto slow = ladder_brute_force(chi, cfg);
    double s = 0.0;
    for (double v : slow) s += v * v * g.spacing();
    EXPECT_NEAR(r.ratio, std::sqrt(s) / chi.l2_norm(), 1e-9);
    EXPECT_GE(r.ratio, 1.0);
}

TEST(VectorMaximal, StableAcrossLevels) {
    double ratio[2] = {0.0, 0.0};
    int slot = 0;
    for (int L : {9, 11}) {
        const Grid g = make_grid(8.0, L);
        oracle::Rng rng(35);
        std::vector<SampledFunction> family;
        for (int k = 0; k < 8; ++k) family.push_back(oracle::random_bumps(g, rng, 1));
        const auto p = ExponentFunction::smoothstep(g, 1.3, 2.5, -2.0, 2.0);
        ratio[slot++] = fs_vector_check(family, 2.0, p, MaximalConfig::full(g)).ratio;
    }
    EXPECT_TRUE(std::isfinite(ratio[0]));
    EXPECT_GT(ratio[0], 1.0);
    EXPECT_LT(std::max(ratio[0], ratio[1]) / std::min(ratio[0], ratio[1]), 2.0);
}

TEST(VectorMaximal, RejectsBadArguments) {
    const Grid g = make_grid(8.0, 9);
    const auto p = ExponentFunction::constant(g, 2.0);
    const std::vector<SampledFunction> family{gaussian(g)};
    EXPECT_THROW(fs_vector_check(family, 1.0, p, MaximalConfig::full(g)), DomainError);
    EXPECT_THROW(fs_vector_check({}, 2.0, p, MaximalConfig::full(g)), DomainError);
}
