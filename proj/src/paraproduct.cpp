#include "vh/paraproduct.hpp"

#include "vh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace vh {

namespace {

double mean_oscillation(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double osc = 0.0;
    for (double x : v) osc += std::abs(x - mean);
    return osc / static_cast<double>(v.size());
}

std::size_t grid_index_exact(const Grid& grid, double x) {
    const double pos = (x + grid.half_width()) / grid.spacing();
    const double r = std::round(pos);
    if (std::abs(pos - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(grid.size()))
        throw DomainError("kernel evaluation needs grid points inside the domain");
    return static_cast<std::size_t>(r);
}

} // namespace

double bmo_norm(const SampledFunction& b) {
    const Grid& grid = b.grid();
    const std::size_t M = grid.size();
    const auto v = b.values();
    double best = 0.0;
    // Dyadic cubes are aligned to multiples of their side about x = 0, which is sample M/2.
    for (std::size_t w = 2; w <= M; w *= 2) {
        for (std::size_t offset : {std::size_t{0}, w / 2}) {
            const std::size_t origin = (M / 2 + offset) % w;
            for (std::size_t s = origin; s + w <= M; s += w)
                best = std::max(best, mean_oscillation(v.subspan(s, w)));
        }
    }
    return best;
}

BmoSymbol BmoSymbol::make(SampledFunction b, bool normalize_mean) {
    if (normalize_mean) {
        const double mean = b.integral() / (2.0 * b.grid().half_width());
        std::vector<double> v(b.values().begin(), b.values().end());
        for (double& x : v) x -= mean;
        b = SampledFunction(b.grid(), std::move(v), b.grid().half_width());
    }
    BmoSymbol s{std::move(b), 0.0, normalize_mean};
    s.bmo = bmo_norm(s.b);
    return s;
}

SampledFunction domain_constant(const Grid& grid) {
    return {grid, std::vector<double>(grid.size(), 1.0), grid.half_width()};
}

Paraproduct::Paraproduct(BmoSymbol symbol, ParaproductConfig cfg)
    : symbol_(std::move(symbol)), cfg_(cfg) {
    const FilterBank& bank = *cfg_.bank;
    const CubeLattice& lat = *cfg_.lattice;
    if (!(symbol_.b.grid() == bank.grid())) throw ConfigError("symbol and filter bank on different grids");
    const auto fields = bank.convolve_all_periodic(symbol_.b.values(), FilterKind::Tilde);
    for (int k = lat.j_min(); k <= lat.j_max(); ++k) {
        const auto& field = fields[static_cast<std::size_t>(k - lat.j_min())];
        const auto cubes = lat.cubes(k);
        std::vector<double> row(cubes.size());
        for (std::size_t q = 0; q < cubes.size(); ++q) row[q] = field[cubes[q].center_sample];
        coeffs_.push_back(std::move(row));
    }
}

std::span<const double> Paraproduct::symbol_coefficients(int k) const {
    const CubeLattice& lat = *cfg_.lattice;
    if (k < lat.j_min() || k > lat.j_max()) throw ScaleRangeError("scale outside paraproduct range");
    return coeffs_[static_cast<std::size_t>(k - lat.j_min())];
}

SampledFunction Paraproduct::combine(const std::vector<std::vector<double>>& analysis,
                                     FilterKind synth) const {
    const FilterBank& bank = *cfg_.bank;
    const CubeLattice& lat = *cfg_.lattice;
    const Grid& grid = bank.grid();
    const double h = grid.spacing();
    std::vector<double> out(grid.size(), 0.0);
    std::vector<double> comb(bank.padded_size());
    for (int k = lat.j_min(); k <= lat.j_max(); ++k) {
        const auto idx = static_cast<std::size_t>(k - lat.j_min());
        const auto cubes = lat.cubes(k);
        const auto& field = analysis[idx];
        std::fill(comb.begin(), comb.end(), 0.0);
        for (std::size_t q = 0; q < cubes.size(); ++q)
            comb[cubes[q].center_sample] = cubes[q].side * coeffs_[idx][q] * field[cubes[q].center_sample] / h;
        const auto piece = bank.synthesize_comb(comb, synth, k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += piece[i];
    }
    return {grid, std::move(out), grid.half_width()};
}

SampledFunction Paraproduct::apply(const SampledFunction& f) const {
    if (!(f.grid() == cfg_.bank->grid())) throw ConfigError("function and paraproduct on different grids");
    return combine(cfg_.bank->convolve_all(f.values(), FilterKind::Phi), FilterKind::Psi);
}

SampledFunction Paraproduct::adjoint(const SampledFunction& f) const {
    if (!(f.grid() == cfg_.bank->grid())) throw ConfigError("function and paraproduct on different grids");
    return combine(cfg_.bank->convolve_all(f.values(), FilterKind::Psi), FilterKind::Phi);
}

double Paraproduct::kernel(double x, double y) const {
    if (x == y) throw DomainError("paraproduct kernel is singular on the diagonal");
    const FilterBank& bank = *cfg_.bank;
    const CubeLattice& lat = *cfg_.lattice;
    const auto ix = static_cast<long>(grid_index_exact(bank.grid(), x));
    const auto iy = static_cast<long>(grid_index_exact(bank.grid(), y));
    double total = 0.0;
    for (int k = lat.j_min(); k <= lat.j_max(); ++k) {
        const auto cubes = lat.cubes(k);
        const auto& row = coeffs_[static_cast<std::size_t>(k - lat.j_min())];
        const auto psi = bank.kernel(FilterKind::Psi, k);
        const auto phi = bank.kernel(FilterKind::Phi, k);
        const long n = static_cast<long>(psi.size());
        double s = 0.0;
        for (std::size_t q = 0; q < cubes.size(); ++q) {
            const long c = static_cast<long>(cubes[q].center_sample);
            const long a = ((ix - c) % n + n) % n;
            const long b = ((c - iy) % n + n) % n;
            s += cubes[q].side * psi[static_cast<std::size_t>(a)] * row[q] * phi[static_cast<std::size_t>(b)];
        }
        total += s;
    }
    return total;
}

double Paraproduct::carleson() const {
    const CubeLattice& lat = *cfg_.lattice;
    const auto tops = lat.cubes(lat.j_min());
    std::vector<double> sums(tops.size(), 0.0);
    for (int k = lat.j_min(); k <= lat.j_max(); ++k) {
        const auto cubes = lat.cubes(k);
        const auto& row = coeffs_[static_cast<std::size_t>(k - lat.j_min())];
        for (std::size_t q = 0; q < cubes.size(); ++q)
            sums[lat.position(lat.ancestor(cubes[q], lat.j_min()))] += cubes[q].side * row[q] * row[q];
    }
    double best = 0.0;
    for (std::size_t t = 0; t < tops.size(); ++t) best = std::max(best, sums[t] / tops[t].side);
    return best;
}

SampledFunction paraproduct_apply(const BmoSymbol& b, const SampledFunction& f, const ParaproductConfig& cfg) {
    return Paraproduct(b, cfg).apply(f);
}

SampledFunction paraproduct_adjoint_apply(const BmoSymbol& b, const SampledFunction& f,
                                          const ParaproductConfig& cfg) {
    return Paraproduct(b, cfg).adjoint(f);
}

double kernel_eval(const BmoSymbol& b, const ParaproductConfig& cfg, double x, double y) {
    return Paraproduct(b, cfg).kernel(x, y);
}

double carleson_check(const BmoSymbol& b, const ParaproductConfig& cfg) {
    return Paraproduct(b, cfg).carleson();
}

KernelSample make_kernel_sample(double radius, double spacing, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto cells = static_cast<long>(std::llround(2.0 * radius / spacing));
    std::uniform_int_distribution<long> pos(0, cells - 1);
    std::uniform_real_distribution<double> log_dist(0.0, std::log2(static_cast<double>(cells) / 2.0));
    std::bernoulli_distribution coin(0.5);
    auto point = [&](long c) { return -radius + static_cast<double>(c) * spacing; };
    auto offset = [&] {
        const long d = std::max(1L, std::lround(std::exp2(log_dist(rng))));
        return coin(rng) ? d : -d;
    };

    KernelSample s;
    while (s.pairs.size() < count) {
        const long a = pos(rng);
        const long b = a + offset();
        if (b < 0 || b >= cells) continue;
        s.pairs.emplace_back(point(a), point(b));
    }
    while (s.x_triples.size() < count) {
        const long a = pos(rng);
        const long b = a + offset();
        if (b < 0 || b >= cells || std::abs(b - a) < 2) continue;
        std::uniform_int_distribution<long> small(1, std::abs(b - a) / 2);
        const long a2 = a + (coin(rng) ? small(rng) : -small(rng));
        if (a2 < 0 || a2 >= cells || a2 == b) continue;
        s.x_triples.push_back({point(a), point(a2), point(b)});
    }
    while (s.y_triples.size() < count) {
        const long a = pos(rng);
        const long b = a + offset();
        if (b < 0 || b >= cells || std::abs(b - a) < 2) continue;
        std::uniform_int_distribution<long> small(1, std::abs(b - a) / 2);
        const long b2 = b + (coin(rng) ? small(rng) : -small(rng));
        if (b2 < 0 || b2 >= cells || b2 == a) continue;
        s.y_triples.push_back({point(a), point(b), point(b2)});
    }
    return s;
}

KernelBoundReport kernel_bounds(const Paraproduct& pi, const KernelSample& sample, double epsilon) {
    KernelBoundReport r;
    r.epsilon = epsilon;
    for (const auto& [x, y] : sample.pairs)
        r.size_sup = std::max(r.size_sup, std::abs(pi.kernel(x, y)) * std::abs(x - y));
    for (const auto& [x, x2, y] : sample.x_triples) {
        const double d = std::abs(pi.kernel(x, y) - pi.kernel(x2, y));
        r.smooth_x_sup = std::max(r.smooth_x_sup,
                                  d * std::pow(std::abs(x - y), 1.0 + epsilon) / std::pow(std::abs(x - x2), epsilon));
    }
    for (const auto& [x, y, y2] : sample.y_triples) {
        const double d = std::abs(pi.kernel(x, y) - pi.kernel(x, y2));
        r.smooth_y_sup = std::max(r.smooth_y_sup,
                                  d * std::pow(std::abs(x - y), 1.0 + epsilon) / std::pow(std::abs(y - y2), epsilon));
    }
    const double bmo = pi.symbol().bmo;
    r.size_ratio = bmo > 0.0 ? r.size_sup / bmo : 0.0;
    return r;
}

} // namespace vh
