#pragma once

#include "vh/grid.hpp"
#include "vh/varexp.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace vh {

class FilterBank;

// Uncentered interval maximal operator over a dyadic ladder of window lengths.
struct MaximalConfig {
    double max_radius = 0.0;
    std::vector<std::size_t> window_lengths; // in samples, 1, 2, 4, ...

    // Windows of 1, 2, 4, ... samples up to the largest not exceeding 2*max_radius.
    static MaximalConfig ladder(const Grid& grid, double max_radius);
    static MaximalConfig full(const Grid& grid) { return ladder(grid, grid.half_width()); }
    std::vector<double> radii(const Grid& grid) const;
};

SampledFunction hl_maximal(const SampledFunction& f, const MaximalConfig& cfg);
std::vector<double> hl_maximal(std::span<const double> values, const MaximalConfig& cfg);

// sup over k in [k_min, k_max] of |phi_k * f| with spatial dilation of phi.
SampledFunction smooth_maximal(const SampledFunction& f, const SampledFunction& phi, int k_min,
                               int k_max);
// Same with the bank's smoothing filter applied as an exact multiplier.
SampledFunction smooth_maximal(const SampledFunction& f, const FilterBank& bank);

struct VectorMaximalReport {
    double lhs = 0.0;   // || ||{M f_i}||_{l^q} ||_{L^p}
    double rhs = 0.0;   // || ||{f_i}||_{l^q} ||_{L^p}
    double ratio = 0.0;
    bool vacuous = false;
};

VectorMaximalReport fs_vector_check(std::span<const SampledFunction> family, double q,
                                    const ExponentFunction& p, const MaximalConfig& cfg);

// sup_i a_i / b_i over samples where b_i > floor * max b.
double pointwise_ratio_sup(const SampledFunction& a, const SampledFunction& b, double floor = 1e-8);

} // namespace vh
