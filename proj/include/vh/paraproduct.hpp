#pragma once

#include "vh/calderon.hpp"
#include "vh/filterbank.hpp"
#include "vh/grid.hpp"
#include "vh/varexp.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <span>
#include <vector>

namespace vh {

// Mean oscillation sup over dyadic cubes of every size (>= 2 samples) and their half-shifts.
double bmo_norm(const SampledFunction& b);

struct BmoSymbol {
    SampledFunction b;
    double bmo = 0.0;
    bool mean_normalized = false;

    static BmoSymbol make(SampledFunction b, bool normalize_mean = false);
};

// The constant function on [-R, R).
SampledFunction domain_constant(const Grid& grid);

struct ParaproductConfig {
    const FilterBank* bank = nullptr;
    const CubeLattice* lattice = nullptr;

    ParaproductConfig(const FilterBank& b, const CubeLattice& l) : bank(&b), lattice(&l) {
        require_compatible(b, l);
    }
};

// pi_b with the symbol coefficients (tilde_k * b)(x_Q) cached at construction. The symbol is
// extended periodically from [-R, R) so that constants carry no coefficients.
class Paraproduct {
public:
    Paraproduct(BmoSymbol symbol, ParaproductConfig cfg);

    const BmoSymbol& symbol() const { return symbol_; }
    const ParaproductConfig& config() const { return cfg_; }
    std::span<const double> symbol_coefficients(int k) const;

    SampledFunction apply(const SampledFunction& f) const;
    SampledFunction adjoint(const SampledFunction& f) const;
    // Kernel at grid points x != y.
    double kernel(double x, double y) const;
    // sup over coarsest cubes Qt of |Qt|^-1 sum_{Q in Qt} |Q| |(tilde * b)(x_Q)|^2
    double carleson() const;

private:
    SampledFunction combine(const std::vector<std::vector<double>>& analysis, FilterKind synth) const;

    BmoSymbol symbol_;
    ParaproductConfig cfg_;
    std::vector<std::vector<double>> coeffs_;
};

SampledFunction paraproduct_apply(const BmoSymbol& b, const SampledFunction& f, const ParaproductConfig& cfg);
SampledFunction paraproduct_adjoint_apply(const BmoSymbol& b, const SampledFunction& f,
                                          const ParaproductConfig& cfg);
double kernel_eval(const BmoSymbol& b, const ParaproductConfig& cfg, double x, double y);
double carleson_check(const BmoSymbol& b, const ParaproductConfig& cfg);

struct KernelSample {
    std::vector<std::pair<double, double>> pairs;                 // (x, y)
    std::vector<std::array<double, 3>> x_triples;                 // (x, x', y)
    std::vector<std::array<double, 3>> y_triples;                 // (x, y, y')
};

// Deterministic sample of grid-commensurate points of the given spacing inside [-radius, radius).
KernelSample make_kernel_sample(double radius, double spacing, std::size_t count, std::uint64_t seed);

struct KernelBoundReport {
    double size_sup = 0.0;        // sup |K(x,y)| |x-y|
    double size_ratio = 0.0;      // size_sup / bmo
    double smooth_x_sup = 0.0;    // sup |K(x,y)-K(x',y)| |x-y|^{1+eps} / |x-x'|^eps
    double smooth_y_sup = 0.0;
    double epsilon = 1.0;
};

KernelBoundReport kernel_bounds(const Paraproduct& pi, const KernelSample& sample, double epsilon = 1.0);

} // namespace vh
