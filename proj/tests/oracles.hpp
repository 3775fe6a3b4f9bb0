#pragma once

// Brute-force reference computations and seeded generators shared by the unit tests.

#include "vh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

// Random smooth bump sum supported well inside the grid.
inline vh::SampledFunction random_bumps(const vh::Grid& g, Rng& rng, int count = 3) {
    std::vector<double> c, s, a;
    for (int k = 0; k < count; ++k) {
        c.push_back(rng.uniform(-0.4, 0.4) * g.half_width());
        s.push_back(rng.uniform(0.05, 0.15) * g.half_width());
        a.push_back(rng.uniform(-2.0, 2.0));
    }
    return vh::SampledFunction::sample(g, [=](double x) {
        double v = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) v += a[k] * std::exp(-std::pow((x - c[k]) / s[k], 2));
        return v;
    });
}

// (g_0 * f)(x_i) = sum_k f(x_k) g(x_i - x_k) h with g sampled on the same grid (offsets outside are zero).
inline std::vector<double> direct_convolution(const vh::SampledFunction& f, const vh::SampledFunction& g) {
    const auto& grid = f.grid();
    const long M = static_cast<long>(grid.size());
    const long zero = M / 2;   // x = 0 sits at index M/2
    std::vector<double> out(grid.size(), 0.0);
    for (long i = 0; i < M; ++i) {
        double acc = 0.0;
        for (long k = 0; k < M; ++k) {
            const long d = i - k + zero;
            if (d < 0 || d >= M) continue;
            acc += f[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(d)];
        }
        out[static_cast<std::size_t>(i)] = acc * grid.spacing();
    }
    return out;
}

// sup over every sampled interval [a, b) containing sample i of the mean of |f|.
inline std::vector<double> maximal_all_intervals(const vh::SampledFunction& f) {
    const std::size_t M = f.size();
    std::vector<double> prefix(M + 1, 0.0);
    for (std::size_t i = 0; i < M; ++i) prefix[i + 1] = prefix[i] + std::abs(f[i]);
    std::vector<double> out(M, 0.0);
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = a + 1; b <= M; ++b) {
            const double avg = (prefix[b] - prefix[a]) / static_cast<double>(b - a);
            for (std::size_t i = a; i < b; ++i) out[i] = std::max(out[i], avg);
        }
    return out;
}

// Exhaustive sup of the mean oscillation over sampled intervals of at least two samples.
inline double bmo_all_intervals(const vh::SampledFunction& b) {
    const std::size_t M = b.size();
    double best = 0.0;
    for (std::size_t a = 0; a < M; ++a)
        for (std::size_t e = a + 2; e <= M; ++e) {
            double mean = 0.0;
            for (std::size_t i = a; i < e; ++i) mean += b[i];
            mean /= static_cast<double>(e - a);
            double osc = 0.0;
            for (std::size_t i = a; i < e; ++i) osc += std::abs(b[i] - mean);
            best = std::max(best, osc / static_cast<double>(e - a));
        }
    return best;
}

// Root of lambda -> sum (|f|/lambda)^p h - 1 by plain bisection on a wide bracket.
inline double luxemburg_bisection(const std::vector<double>& f, const std::vector<double>& p, double h) {
    auto modular = [&](double lam) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] != 0.0) s += std::pow(std::abs(f[i]) / lam, p[i]) * h;
        return s;
    };
    double lo = 1e-12, hi = 1e12;
    for (int it = 0; it < 400; ++it) {
        const double mid = std::sqrt(lo * hi);
        (modular(mid) > 1.0 ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

inline double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace oracle
