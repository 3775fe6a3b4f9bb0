#pragma once

#include "vh/filterbank.hpp"
#include "vh/grid.hpp"
#include "vh/varexp.hpp"

#include <span>
#include <string>
#include <vector>

namespace vh {

// Coefficients (j, Q) -> value over a lattice. Holds non-owning references to bank and lattice.
class CoefficientField {
public:
    CoefficientField(const FilterBank& bank, const CubeLattice& lattice);

    const FilterBank& bank() const { return *bank_; }
    const CubeLattice& lattice() const { return *lattice_; }
    std::span<const double> scale(int j) const;
    std::span<double> scale(int j);
    double at(int j, std::size_t position) const { return scale(j)[position]; }
    // sum_{j,Q} |Q| c^2
    double energy() const;

private:
    const FilterBank* bank_;
    const CubeLattice* lattice_;
    std::vector<std::vector<double>> coeffs_;
};

void require_compatible(const FilterBank& bank, const CubeLattice& lattice);

CoefficientField analyze(const SampledFunction& f, const FilterBank& bank, const CubeLattice& lattice);
SampledFunction synthesize(const CoefficientField& c);

SampledFunction square_function_G(const SampledFunction& f, const FilterBank& bank);
SampledFunction square_function_Gd(const SampledFunction& f, const FilterBank& bank,
                                   const CubeLattice& lattice);

enum class HardyMethod { SmoothMaximal, DiscreteSquare };
std::string to_string(HardyMethod m);

double hardy_norm(const SampledFunction& f, const ExponentFunction& p, const FilterBank& bank,
                  const CubeLattice& lattice, HardyMethod method);

// Band projection sum_j psi_j * psi_j * f (the infinitely sampled Calderon sum).
SampledFunction band_projection(const SampledFunction& f, const FilterBank& bank);
// Same with f extended periodically from [-R, R).
SampledFunction band_projection_periodic(const SampledFunction& f, const FilterBank& bank);

} // namespace vh
