#include "vh/filterbank.hpp"

#include "vh/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace vh {
namespace {

// Smooth step: 0 for u <= 0, 1 for u >= 1, S(u) + S(1-u) = 1.
double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = FilterBank::transition_sharpness;
    const double g0 = std::exp(-a / u);
    const double g1 = std::exp(-a / (1.0 - u));
    return g0 / (g0 + g1);
}

// Bump with theta_hat(xi)^2 = S(1 - |log2 |xi||), supported in 1/2 < |xi| < 2.
double theta_sq(double xi) {
    const double ax = std::abs(xi);
    if (ax <= 0.5 || ax >= 2.0) return 0.0;
    return smooth_step(1.0 - std::abs(std::log2(ax)));
}

} // namespace

double FilterBank::psi_hat(double xi) {
    const double t = theta_sq(xi);
    if (t == 0.0) return 0.0;
    // Normalize by the full dyadic square sum; only neighbouring octaves overlap.
    double s = 0.0;
    for (int m = -2; m <= 2; ++m) s += theta_sq(std::ldexp(xi, m));
    return std::sqrt(t / s);
}

double FilterBank::phi_hat(double xi) { return std::exp(-std::numbers::pi * xi * xi); }

double FilterBank::band_lo() const { return std::ldexp(1.0, j_min_); }
double FilterBank::band_hi() const { return std::ldexp(1.0, j_max_); }

double FilterBank::multiplier(FilterKind kind, int j, double xi) const {
    const double s = std::ldexp(xi, -j);
    return kind == FilterKind::Phi ? phi_hat(s) : psi_hat(s);
}

double FilterBank::partition_sum(double xi) const {
    double s = 0.0;
    for (int j = j_min_; j <= j_max_; ++j) {
        const double v = psi_hat(std::ldexp(xi, -j));
        s += v * v;
    }
    return s;
}

std::size_t FilterBank::slot(FilterKind kind, int j) const {
    if (j < j_min_ || j > j_max_) throw ScaleRangeError("scale " + std::to_string(j) + " outside filter bank");
    return 2 * static_cast<std::size_t>(j - j_min_) + (kind == FilterKind::Phi ? 1 : 0);
}

FilterBank FilterBank::build(const Grid& grid, int N, int j_min, int j_max, int M) {
    if (j_min > j_max) throw ConfigError("filter bank scale range is empty");
    if (M < 0 || M > 8) throw ConfigError("moment order must lie in [0, 8]");
    if (N < 0) throw ConfigError("shift N must be nonnegative");
    const double h = grid.spacing();
    for (int j : {j_min, j_max}) {
        const double w = std::ldexp(1.0, -j);
        if (w < 4.0 * h || w > grid.half_width())
            throw ScaleRangeError("scale " + std::to_string(j) + " not resolvable on this grid");
    }

    // Wide grid for the scale-0 prototypes: same spacing, radius >= 256.
    int extra = 0;
    while (std::ldexp(grid.half_width(), extra) < std::max(256.0, 2.0 * grid.half_width())) ++extra;
    const Grid fg = Grid::make(std::ldexp(grid.half_width(), extra), grid.level() + extra);
    const std::size_t nf = fg.size();

    // psi(x_m) = (1/h) * inverse(X)[m] with X_k = (-1)^k psi_hat(xi_k), since x_0 = -n h / 2.
    fft::Spectrum X(nf / 2 + 1);
    for (std::size_t k = 0; k < X.size(); ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        X[k] = sign * psi_hat(fft::frequency(k, nf, h));
    }
    auto psi_vals = fft::inverse(X, nf);
    for (double& v : psi_vals) v /= h;

    FilterBankReport rep;
    const double peak = *std::max_element(psi_vals.begin(), psi_vals.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
    double r_t = 0.0;
    for (std::size_t m = 0; m < nf; ++m)
        if (std::abs(psi_vals[m]) >= 1e-12 * std::abs(peak)) r_t = std::max(r_t, std::abs(fg.point(m)));
    for (std::size_t m = 0; m < nf; ++m)
        if (std::abs(fg.point(m)) > r_t) psi_vals[m] = 0.0;
    rep.truncation_radius = r_t;

    // Remove residual moments 0..M with a gaussian-weighted polynomial.
    const int dim = M + 1;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(dim);
    for (std::size_t m = 0; m < nf; ++m) {
        const double x = fg.point(m);
        const double w = std::exp(-0.5 * x * x);
        double xa = 1.0;
        for (int a = 0; a < dim; ++a) {
            mom(a) += psi_vals[m] * xa * h;
            double xb = 1.0;
            for (int b = 0; b < dim; ++b) {
                G(a, b) += w * xa * xb * h;
                xb *= x;
            }
            xa *= x;
        }
    }
    const Eigen::VectorXd c = G.fullPivLu().solve(mom);
    for (std::size_t m = 0; m < nf; ++m) {
        const double x = fg.point(m);
        const double w = std::exp(-0.5 * x * x);
        double poly = 0.0;
        double xa = 1.0;
        for (int a = 0; a < dim; ++a) {
            poly += c(a) * xa;
            xa *= x;
        }
        const double corr = poly * w;
        if (std::abs(x) <= r_t) psi_vals[m] -= corr;
        rep.moment_correction = std::max(rep.moment_correction, std::abs(corr));
    }

    SampledFunction psi(fg, std::move(psi_vals), r_t);
    SampledFunction phi = SampledFunction::sample(fg, [](double x) {
        return std::exp(-std::numbers::pi * x * x);
    });

    FilterBank bank(grid, fg, std::move(psi), std::move(phi));
    bank.N_ = N;
    bank.j_min_ = j_min;
    bank.j_max_ = j_max;
    bank.M_ = M;

    const std::size_t n = bank.padded_size();
    const std::size_t bins = n / 2 + 1;
    for (int j = j_min; j <= j_max; ++j) {
        for (FilterKind kind : {FilterKind::Psi, FilterKind::Phi}) {
            std::vector<double> mult(bins);
            fft::Spectrum K(bins);
            for (std::size_t k = 0; k < bins; ++k) {
                mult[k] = bank.multiplier(kind, j, fft::frequency(k, n, h));
                K[k] = mult[k] / h;
            }
            bank.kernels_.push_back(fft::inverse(K, n));
            bank.multipliers_.push_back(std::move(mult));
        }
    }

    // Partition of unity on the padded-buffer bins inside the band.
    for (std::size_t k = 0; k < bins; ++k) {
        const double xi = fft::frequency(k, n, h);
        if (xi < bank.band_lo() || xi > bank.band_hi()) continue;
        rep.partition_residual = std::max(rep.partition_residual, std::abs(bank.partition_sum(xi) - 1.0));
    }
    for (std::size_t k = 0; k < nf / 2 + 1; ++k) {
        const double xi = fft::frequency(k, nf, h);
        if (xi < 0.5 || xi > 2.0) rep.annulus_leak = std::max(rep.annulus_leak, psi_hat(xi));
    }
    rep.psi_moments = check_moments(bank.psi_, M);
    rep.phi_integral = bank.phi_.integral();
    const double psi_peak = bank.psi_.sup_norm();
    for (std::size_t m = 0; m < nf; ++m) {
        const double x = fg.point(m);
        rep.decay_ratio = std::max(rep.decay_ratio, std::abs(bank.psi_[m]) * std::pow(1.0 + std::abs(x), 4) / psi_peak);
    }
    bank.report_ = rep;

    if (rep.partition_residual > 1e-10)
        throw NumericalIntegrityError("partition of unity residual " + std::to_string(rep.partition_residual));
    if (std::abs(rep.phi_integral - 1.0) > 1e-8) throw NumericalIntegrityError("smoothing filter not normalized");
    for (double m : rep.psi_moments)
        if (std::abs(m) > 1e-8) throw NumericalIntegrityError("analysis filter moment above 1e-8");
    return bank;
}

FilterBank build_filterbank(const Grid& grid, int N, int j_min, int j_max, int M) {
    return FilterBank::build(grid, N, j_min, j_max, M);
}

fft::Spectrum FilterBank::spectrum(std::span<const double> values) const {
    if (values.size() != grid_.size()) throw ConfigError("input length does not match bank grid");
    return fft::forward(fft::zero_pad(values, padded_size()));
}

std::vector<double> FilterBank::apply(const fft::Spectrum& F, FilterKind kind, int j) const {
    const auto& mult = multipliers_[slot(kind, j)];
    fft::Spectrum G(F.size());
    for (std::size_t k = 0; k < F.size(); ++k) G[k] = F[k] * mult[k];
    auto out = fft::inverse(G, padded_size());
    out.resize(grid_.size());
    return out;
}

std::vector<double> FilterBank::convolve(std::span<const double> values, FilterKind kind, int j) const {
    return apply(spectrum(values), kind, j);
}

SampledFunction FilterBank::convolve(const SampledFunction& f, FilterKind kind, int j) const {
    if (!(f.grid() == grid_)) throw ConfigError("function and filter bank on different grids");
    return {grid_, convolve(f.values(), kind, j), grid_.half_width()};
}

std::vector<std::vector<double>> FilterBank::convolve_all(std::span<const double> values,
                                                          FilterKind kind) const {
    const auto F = spectrum(values);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(scale_count()));
    for (int j = j_min_; j <= j_max_; ++j) out.push_back(apply(F, kind, j));
    return out;
}

std::vector<std::vector<double>> FilterBank::convolve_all_periodic(std::span<const double> values,
                                                                   FilterKind kind) const {
    if (values.size() != grid_.size()) throw ConfigError("input length does not match bank grid");
    const std::size_t n = grid_.size();
    const auto F = fft::forward(values);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(scale_count()));
    fft::Spectrum G(F.size());
    for (int j = j_min_; j <= j_max_; ++j) {
        for (std::size_t k = 0; k < F.size(); ++k)
            G[k] = F[k] * multiplier(kind, j, fft::frequency(k, n, grid_.spacing()));
        out.push_back(fft::inverse(G, n));
    }
    return out;
}

std::span<const double> FilterBank::kernel(FilterKind kind, int j) const {
    return kernels_[slot(kind, j)];
}

double FilterBank::kernel_at(FilterKind kind, int j, long offset) const {
    const auto& k = kernels_[slot(kind, j)];
    const long n = static_cast<long>(k.size());
    long m = offset % n;
    if (m < 0) m += n;
    return k[static_cast<std::size_t>(m)];
}

std::vector<double> FilterBank::synthesize_comb(std::span<const double> comb, FilterKind kind, int j) const {
    if (comb.size() != padded_size()) throw ConfigError("comb must have padded length");
    auto F = fft::forward(comb);
    const auto& mult = multipliers_[slot(kind, j)];
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= mult[k];
    return fft::inverse(F, padded_size());
}

double FilterBank::band_energy_fraction(const SampledFunction& f) const {
    const auto F = spectrum(f.values());
    const std::size_t n = padded_size();
    double total = 0.0;
    double in_band = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        const double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        const double e = w * std::norm(F[k]);
        total += e;
        const double xi = fft::frequency(k, n, grid_.spacing());
        if (std::abs(xi) >= band_lo() && std::abs(xi) <= band_hi()) in_band += e;
    }
    return total > 0.0 ? in_band / total : 1.0;
}

std::vector<double> check_moments(const SampledFunction& g, int order) {
    if (order < 0 || order > 8) throw DomainError("moment order must lie in [0, 8]");
    std::vector<double> m(static_cast<std::size_t>(order) + 1, 0.0);
    const Grid& grid = g.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = grid.point(i);
        double xa = 1.0;
        for (auto& v : m) {
            v += g[i] * xa;
            xa *= x;
        }
    }
    for (auto& v : m) v *= grid.spacing();
    return m;
}

} // namespace vh
