#include "vh/corpus.hpp"

#include "vh/errors.hpp"
#include "vh/fft.hpp"
#include "vh/filterbank.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace vh {

namespace {

double gaussian(double x, double s) { return std::exp(-x * x / (2.0 * s * s)); }

// chi_[a,b] convolved with a unit gaussian of width s.
double mollified_box(double x, double a, double b, double s) {
    const double k = 1.0 / (std::numbers::sqrt2 * s);
    return 0.5 * (std::erf((x - a) * k) - std::erf((x - b) * k));
}

} // namespace

std::vector<std::string> corpus_generators() {
    return {"gaussian",       "gaussian_derivative", "mexican_hat",
            "psi_bump",       "psi_bump_fine",       "mollified_step",
            "mollified_indicator", "wavepackets",    "zero"};
}

SampledFunction psi_bump(const Grid& grid, int j, double c) {
    const std::size_t M = grid.size();
    const std::size_t n = 4 * M;
    const double h = grid.spacing();
    // Buffer point i is x = -R + i h; periodic images are 8R apart.
    fft::Spectrum G(n / 2 + 1);
    for (std::size_t k = 0; k < G.size(); ++k) {
        const double xi = fft::frequency(k, n, h);
        G[k] = FilterBank::psi_hat(std::ldexp(xi, -j)) *
               std::polar(1.0, -2.0 * std::numbers::pi * xi * (c + grid.half_width()));
    }
    auto v = fft::inverse(G, n);
    v.resize(M);
    for (double& x : v) x /= h;
    return {grid, std::move(v), grid.half_width()};
}

CorpusMember make_member(const Grid& grid, const std::string& gen, std::size_t index, std::uint64_t seed) {
    CorpusMember m{gen + "_" + std::to_string(index), gen, SampledFunction(grid)};
    if (gen == "gaussian") {
        m.f = SampledFunction::sample(grid, [](double x) { return gaussian(x, 0.5); });
    } else if (gen == "gaussian_derivative") {
        m.f = SampledFunction::sample(grid, [](double x) { return -x / (0.25 * 0.25) * gaussian(x, 0.25); });
    } else if (gen == "mexican_hat") {
        m.f = SampledFunction::sample(grid, [](double x) {
            const double s = 0.3;
            return (1.0 - x * x / (s * s)) * gaussian(x, s);
        });
    } else if (gen == "psi_bump") {
        m.f = psi_bump(grid, 2, 0.5);
    } else if (gen == "psi_bump_fine") {
        m.f = psi_bump(grid, 3, -1.0);
    } else if (gen == "mollified_step") {
        m.f = SampledFunction::sample(grid, [](double x) {
            return mollified_box(x, 0.0, 1.0, 0.05) - mollified_box(x, 1.0, 2.0, 0.05);
        });
    } else if (gen == "mollified_indicator") {
        m.f = SampledFunction::sample(grid, [](double x) { return mollified_box(x, 0.0, 1.0, 0.05); });
    } else if (gen == "wavepackets") {
        std::mt19937_64 rng(seed + 1000003ULL * index);
        std::uniform_real_distribution<double> nu(3.0, 12.0), sigma(0.35, 0.7), amp(-3.0, 3.0),
            center(-2.0, 2.0), phase(0.0, 2.0 * std::numbers::pi);
        struct Packet {
            double nu, sigma, amp, center, phase;
        };
        std::vector<Packet> ps;
        for (int k = 0; k < 3; ++k) {
            const double a = nu(rng), b = sigma(rng), c = amp(rng), d = center(rng), e = phase(rng);
            ps.push_back({a, b, c, d, e});
        }
        m.f = SampledFunction::sample(grid, [ps](double x) {
            double s = 0.0;
            for (const auto& p : ps)
                s += p.amp * std::cos(2.0 * std::numbers::pi * p.nu * (x - p.center) + p.phase) *
                     gaussian(x - p.center, p.sigma);
            return s;
        });
    } else if (gen == "zero") {
        m.f = SampledFunction(grid);
    } else {
        throw ConfigError("unknown corpus generator '" + gen + "'");
    }
    return m;
}

std::vector<CorpusMember> make_corpus(const Grid& grid, const std::vector<std::string>& generators,
                                      std::uint64_t seed) {
    std::vector<CorpusMember> out;
    for (std::size_t i = 0; i < generators.size(); ++i) out.push_back(make_member(grid, generators[i], i, seed));
    return out;
}

std::vector<CorpusMember> make_corpus(const Grid& grid, std::size_t count, std::uint64_t seed) {
    const std::vector<std::string> fixed = {"gaussian",       "gaussian_derivative", "mexican_hat",
                                            "psi_bump",       "psi_bump_fine",       "mollified_step",
                                            "mollified_indicator"};
    std::vector<std::string> gens;
    for (std::size_t i = 0; i < count; ++i) gens.push_back(i < fixed.size() ? fixed[i] : "wavepackets");
    return make_corpus(grid, gens, seed);
}

} // namespace vh
