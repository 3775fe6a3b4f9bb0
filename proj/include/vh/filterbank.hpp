#pragma once

#include "vh/fft.hpp"
#include "vh/grid.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace vh {

enum class FilterKind { Psi, Phi, Tilde };

struct FilterBankReport {
    double partition_residual = 0.0;   // sup over band bins of |sum_j psi_hat_j^2 - 1|
    double annulus_leak = 0.0;         // sup |psi_hat| outside 1/2 <= |xi| <= 2
    std::vector<double> psi_moments;   // int psi x^a, a = 0..M
    double phi_integral = 0.0;
    double decay_ratio = 0.0;          // sup |psi(x)| (1+|x|)^4 / sup |psi|
    double truncation_radius = 0.0;
    double moment_correction = 0.0;    // sup of the polynomial correction applied to psi
};

// Filter triple with exact frequency partition of unity on [2^j_min, 2^j_max].
class FilterBank {
public:
    static constexpr double transition_sharpness = 2.0;

    static FilterBank build(const Grid& grid, int N, int j_min, int j_max, int M);

    static double psi_hat(double xi);
    static double phi_hat(double xi);

    const Grid& grid() const { return grid_; }
    int shift() const { return N_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }
    int scale_count() const { return j_max_ - j_min_ + 1; }
    int moment_order() const { return M_; }
    double band_lo() const;
    double band_hi() const;

    // Prototypes at scale 0 on the wide filter grid.
    const Grid& filter_grid() const { return filter_grid_; }
    const SampledFunction& psi() const { return psi_; }
    const SampledFunction& phi() const { return phi_; }
    const SampledFunction& tilde() const { return psi_; }

    double multiplier(FilterKind kind, int j, double xi) const;
    double partition_sum(double xi) const;

    std::size_t padded_size() const { return 2 * grid_.size(); }
    fft::Spectrum spectrum(std::span<const double> values) const;
    std::vector<double> apply(const fft::Spectrum& F, FilterKind kind, int j) const;
    std::vector<double> convolve(std::span<const double> values, FilterKind kind, int j) const;
    SampledFunction convolve(const SampledFunction& f, FilterKind kind, int j) const;
    // Index j - j_min.
    std::vector<std::vector<double>> convolve_all(std::span<const double> values, FilterKind kind) const;
    // Same with values extended periodically from [-R, R); constants map to zero.
    std::vector<std::vector<double>> convolve_all_periodic(std::span<const double> values, FilterKind kind) const;

    // Periodized kernel samples at circular offsets m*h, m = 0 .. 2M-1.
    std::span<const double> kernel(FilterKind kind, int j) const;
    double kernel_at(FilterKind kind, int j, long offset) const;

    // Circular convolution of a padded-length comb with the scale-j kernel.
    std::vector<double> synthesize_comb(std::span<const double> comb, FilterKind kind, int j) const;

    // Fraction of energy (padded DFT) at |xi| in [band_lo, band_hi].
    double band_energy_fraction(const SampledFunction& f) const;

    const FilterBankReport& report() const { return report_; }

private:
    FilterBank(Grid g, Grid fg, SampledFunction psi, SampledFunction phi)
        : grid_(g), filter_grid_(fg), psi_(std::move(psi)), phi_(std::move(phi)) {}
    std::size_t slot(FilterKind kind, int j) const;

    Grid grid_;
    Grid filter_grid_;
    SampledFunction psi_;
    SampledFunction phi_;
    int N_ = 2;
    int j_min_ = 0;
    int j_max_ = 0;
    int M_ = 3;
    std::vector<std::vector<double>> multipliers_; // [2 * scale + {0 psi, 1 phi}], rfft bins
    std::vector<std::vector<double>> kernels_;
    FilterBankReport report_;
};

FilterBank build_filterbank(const Grid& grid, int N, int j_min, int j_max, int M);

// [int g x^a dx] for a = 0..order by h-quadrature.
std::vector<double> check_moments(const SampledFunction& g, int order);

} // namespace vh
