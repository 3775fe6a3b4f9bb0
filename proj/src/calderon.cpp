#include "vh/calderon.hpp"

#include "vh/errors.hpp"
#include "vh/maximal.hpp"

#include <cmath>

namespace vh {

void require_compatible(const FilterBank& bank, const CubeLattice& lattice) {
    if (!(bank.grid() == lattice.grid())) throw ConfigError("filter bank and lattice on different grids");
    if (bank.j_min() != lattice.j_min() || bank.j_max() != lattice.j_max())
        throw ConfigError("filter bank and lattice scale ranges differ");
    if (bank.shift() != lattice.shift()) throw ConfigError("filter bank and lattice shifts differ");
}

CoefficientField::CoefficientField(const FilterBank& bank, const CubeLattice& lattice)
    : bank_(&bank), lattice_(&lattice) {
    require_compatible(bank, lattice);
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j)
        coeffs_.emplace_back(lattice.cubes(j).size(), 0.0);
}

std::span<const double> CoefficientField::scale(int j) const {
    if (j < lattice_->j_min() || j > lattice_->j_max()) throw ScaleRangeError("scale outside coefficient field");
    return coeffs_[static_cast<std::size_t>(j - lattice_->j_min())];
}

std::span<double> CoefficientField::scale(int j) {
    if (j < lattice_->j_min() || j > lattice_->j_max()) throw ScaleRangeError("scale outside coefficient field");
    return coeffs_[static_cast<std::size_t>(j - lattice_->j_min())];
}

double CoefficientField::energy() const {
    double e = 0.0;
    for (int j = lattice_->j_min(); j <= lattice_->j_max(); ++j) {
        const auto cubes = lattice_->cubes(j);
        const auto c = scale(j);
        for (std::size_t q = 0; q < c.size(); ++q) e += cubes[q].side * c[q] * c[q];
    }
    return e;
}

CoefficientField analyze(const SampledFunction& f, const FilterBank& bank, const CubeLattice& lattice) {
    CoefficientField c(bank, lattice);
    if (!(f.grid() == bank.grid())) throw ConfigError("function and filter bank on different grids");
    const auto fields = bank.convolve_all(f.values(), FilterKind::Psi);
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        const auto& field = fields[static_cast<std::size_t>(j - lattice.j_min())];
        const auto cubes = lattice.cubes(j);
        auto row = c.scale(j);
        for (std::size_t q = 0; q < cubes.size(); ++q) row[q] = field[cubes[q].center_sample];
    }
    return c;
}

SampledFunction synthesize(const CoefficientField& c) {
    const FilterBank& bank = c.bank();
    const CubeLattice& lattice = c.lattice();
    const Grid& grid = bank.grid();
    const double h = grid.spacing();
    std::vector<double> out(grid.size(), 0.0);
    std::vector<double> comb(bank.padded_size());
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        std::fill(comb.begin(), comb.end(), 0.0);
        const auto cubes = lattice.cubes(j);
        const auto row = c.scale(j);
        bool any = false;
        for (std::size_t q = 0; q < cubes.size(); ++q) {
            comb[cubes[q].center_sample] = cubes[q].side * row[q] / h;
            any = any || row[q] != 0.0;
        }
        if (!any) continue;
        const auto piece = bank.synthesize_comb(comb, FilterKind::Psi, j);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += piece[i];
    }
    return {grid, std::move(out), grid.half_width()};
}

SampledFunction square_function_G(const SampledFunction& f, const FilterBank& bank) {
    const auto fields = bank.convolve_all(f.values(), FilterKind::Psi);
    std::vector<double> out(f.size(), 0.0);
    for (const auto& field : fields)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += field[i] * field[i];
    for (double& v : out) v = std::sqrt(v);
    return {f.grid(), std::move(out), f.grid().half_width()};
}

SampledFunction square_function_Gd(const SampledFunction& f, const FilterBank& bank,
                                   const CubeLattice& lattice) {
    const auto c = analyze(f, bank, lattice);
    std::vector<double> out(f.size(), 0.0);
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        const auto cubes = lattice.cubes(j);
        const auto row = c.scale(j);
        for (std::size_t q = 0; q < cubes.size(); ++q) {
            const double v = row[q] * row[q];
            for (std::size_t i = cubes[q].first; i < cubes[q].first + cubes[q].count; ++i) out[i] += v;
        }
    }
    for (double& v : out) v = std::sqrt(v);
    return {f.grid(), std::move(out), f.grid().half_width()};
}

std::string to_string(HardyMethod m) {
    return m == HardyMethod::SmoothMaximal ? "smooth_maximal" : "Gd";
}

double hardy_norm(const SampledFunction& f, const ExponentFunction& p, const FilterBank& bank,
                  const CubeLattice& lattice, HardyMethod method) {
    if (!(p.grid() == f.grid())) throw ConfigError("exponent and function on different grids");
    if (!p.log_holder().pass) throw PreconditionError("Hardy norm needs a log-Holder exponent");
    if (f.is_zero()) return 0.0;
    const auto g = method == HardyMethod::SmoothMaximal ? smooth_maximal(f, bank)
                                                         : square_function_Gd(f, bank, lattice);
    return luxemburg_norm(g, p);
}

SampledFunction band_projection(const SampledFunction& f, const FilterBank& bank) {
    const auto F = bank.spectrum(f.values());
    fft::Spectrum G(F.size());
    const std::size_t n = bank.padded_size();
    for (std::size_t k = 0; k < F.size(); ++k)
        G[k] = F[k] * bank.partition_sum(fft::frequency(k, n, bank.grid().spacing()));
    auto out = fft::inverse(G, n);
    out.resize(f.size());
    return {f.grid(), std::move(out), f.grid().half_width()};
}

SampledFunction band_projection_periodic(const SampledFunction& f, const FilterBank& bank) {
    const std::size_t n = f.size();
    auto F = fft::forward(f.values());
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= bank.partition_sum(fft::frequency(k, n, f.grid().spacing()));
    return {f.grid(), fft::inverse(F, n), f.grid().half_width()};
}

} // namespace vh
