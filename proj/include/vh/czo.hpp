#pragma once

#include "vh/calderon.hpp"
#include "vh/filterbank.hpp"
#include "vh/grid.hpp"
#include "vh/paraproduct.hpp"
#include "vh/varexp.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vh {

// K(x, y) = s * a_L(x) * k(x - y) * a_R(y), or an arbitrary evaluator without a fast apply.
class CzoKernel {
public:
    using Profile = std::function<double(double)>;
    using Evaluator = std::function<double(double, double)>;

    // Convolution kernel k(x - y), zero for |x - y| >= support. The multiplier is k_hat by quadrature.
    static CzoKernel convolution(std::string name, Profile k, double epsilon, double size_constant,
                                 double support);
    static CzoKernel custom(std::string name, Evaluator K, double epsilon, double size_constant,
                            double support = std::numeric_limits<double>::infinity());

    // Multiplies the kernel by a_L(x) a_R(y); bandwidth bounds the frequency support of the factors.
    CzoKernel modulated(std::string name, Profile left, Profile right, double bandwidth) const;
    CzoKernel scaled(double c) const;

    double operator()(double x, double y) const;

    const std::string& name() const { return name_; }
    double epsilon() const { return epsilon_; }
    double size_constant() const { return size_constant_ * std::abs(scale_); }
    double support() const { return support_; }
    double scale() const { return scale_; }
    bool translation_invariant() const { return profile_ && !left_ && !right_; }
    bool has_apply() const { return static_cast<bool>(profile_); }
    double modulation_bandwidth() const { return bandwidth_; }

    // s * k(t) for translation-invariant kernels.
    double profile(double t) const;
    // s * k_hat(xi), k_hat(xi) = int k(t) exp(-2 pi i xi t) dt.
    std::complex<double> multiplier(double xi) const;

    // Spectral route: zero-padded linear convolution with the multiplier, modulations applied pointwise.
    SampledFunction apply(const SampledFunction& f) const;
    // Same route on a periodic buffer with points x_i = x0 + i h; bins above xi_cut are dropped.
    std::vector<double> apply_periodic(std::span<const double> g, double h, double x0,
                                       double xi_cut = std::numeric_limits<double>::infinity()) const;

private:
    CzoKernel() = default;
    struct MultiplierCache;

    std::string name_;
    Evaluator evaluator_;
    Profile profile_;
    Profile left_;
    Profile right_;
    double epsilon_ = 1.0;
    double size_constant_ = 1.0;
    double support_ = std::numeric_limits<double>::infinity();
    double bandwidth_ = 0.0;
    double scale_ = 1.0;
    std::shared_ptr<MultiplierCache> cache_;

    friend std::vector<std::complex<double>> multiplier_table(const CzoKernel&, std::size_t, double, double);
};

// k_hat at the rfft bins of a length-n buffer with spacing h, zero above |xi| > xi_cut. Scale included.
std::vector<std::complex<double>> multiplier_table(const CzoKernel& K, std::size_t n, double h,
                                                   double xi_cut = std::numeric_limits<double>::infinity());

// Smooth cutoff: 1 for |t| <= 2, 0 for |t| >= 4.
double kernel_cutoff(double t);

// Operator zoo: hilbert, mollifier, modulated_left, modulated_right, dilation_modulated.
std::vector<std::string> zoo_names();
CzoKernel make_operator(const std::string& name, double scale = 1.0);

// Principal-value quadrature on the grid: sum over odd offsets m of K(x_i, x_i - m h) f(x_i - m h) 2h.
SampledFunction apply_kernel(const CzoKernel& K, const SampledFunction& f);

struct KernelConditionReport {
    std::size_t pairs = 0;
    std::size_t triples = 0;
    double size_sup = 0.0;       // sup |K(x,y)| |x-y|
    double smooth_x_sup = 0.0;   // sup |K(x,y)-K(x',y)| |x-y|^{1+eps} / |x-x'|^eps
    double smooth_y_sup = 0.0;
    double size_ratio = 0.0;     // size_sup / C_K
    double declared = 0.0;
    bool pass = false;
};

// Random pairs with |x| <= radius and log-uniform |x - y|; triples with |x - x'| <= |x - y| / 2.
KernelConditionReport kernel_condition_check(const CzoKernel& K, std::size_t samples, std::uint64_t seed,
                                             double radius = 4.0);

// Periodic buffer carrying filters and kernels for the matrix-coefficient computations.
struct CoefficientBuffer {
    double spacing = 0.0;
    std::size_t size = 0;    // points at x_i = (i - size/2) * spacing
    double period() const { return spacing * static_cast<double>(size); }
    double point(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(size / 2)) * spacing;
    }
    // Period >= max(8 R, 32 * 2^{-j_lo}) at the grid's spacing.
    static CoefficientBuffer for_scales(const Grid& grid, int j_lo);
};

struct MatrixCoefficient {
    double kernel_route = 0.0;
    double apply_route = 0.0;
    bool cross_checked = false;
    double gap = 0.0;           // |kernel - apply| / (||psi_j|| ||psi_j'||)
    double value() const { return kernel_route; }
};

inline constexpr double route_tolerance = 1e-4;

// int int psi_j(x_Q - u) K(u, v) psi_j'(v - x_Q') du dv. Throws NumericalIntegrityError when the
// kernel and apply routes disagree by more than route_tolerance * ||psi_j|| ||psi_j'||.
MatrixCoefficient matrix_coeff(const CzoKernel& T, const FilterBank& bank, int j, int jp, double xq, double xqp);

// 2^{-|j-j'| eps} 2^{-(j^j') eps} / (2^{-(j^j')} + |d|)^{1+eps}
double orthogonality_bound(int j, int jp, double d, double epsilon);

struct OrthogonalityRow {
    int j = 0;
    int jp = 0;
    double max_ratio = 0.0;
    double max_coeff = 0.0;
    std::size_t pairs = 0;
    double route_gap = 0.0;
};

struct OrthogonalityReport {
    std::vector<OrthogonalityRow> rows;
    double c_emp = 0.0;
    double epsilon = 1.0;
    double max_route_gap = 0.0;
    bool hypothesis_ok = false;
    bool flagged = false;
    bool finite = false;
    std::string note;
};

struct OrthogonalityOptions {
    int j_lo = -3;
    int j_hi = 3;
    // Points of the inner region |x| <= inner_radius used as x_Q; defaults to R.
    double inner_radius = 0.0;
    std::size_t general_anchors = 4;   // x_Q' per scale for kernels without translation invariance
    double route_tol = route_tolerance;
};

OrthogonalityReport almost_orthogonality_check(const CzoKernel& T, const FilterBank& bank,
                                               const CubeLattice& lattice, const OrthogonalityOptions& opt);

enum class PairingSide {
    Right,   // <T1, eta> = int int K(x,y) eta(x) dy dx
    Left     // <T*1, eta> = int int K(x,y) eta(y) dy dx
};
std::string to_string(PairingSide s);

struct PairingResult {
    double value = 0.0;
    double window = 0.0;      // half-width of the window in the free variable
    double tail_bound = 0.0;  // size/smoothness estimate of the discarded part
};

// eta must have integral 0 within 1e-8 (PreconditionError otherwise). Window 0 picks support + kernel reach.
PairingResult pairing_T1(const CzoKernel& T, const SampledFunction& eta, PairingSide side, double window = 0.0);

// Mean-zero compactly supported test functions on the grid.
std::vector<SampledFunction> pairing_battery(const Grid& grid);

// max |<T1 or T*1, eta>| / ||eta||_1 over the battery.
double pairing_battery_max(const CzoKernel& T, const Grid& grid, PairingSide side);

inline constexpr double pairing_tolerance = 1e-6;

// T1(x_i) = sum over odd offsets of K(x_i, x_i - m h) 2h with |m h| <= window.
SampledFunction t1_function(const CzoKernel& T, const Grid& grid, double window = 0.0);

// T~ = T - pi_{T1}.
class CorrectedOperator {
public:
    CorrectedOperator(CzoKernel T, const FilterBank& bank, const CubeLattice& lattice);

    const CzoKernel& base() const { return T_; }
    const SampledFunction& t1() const { return t1_; }
    const Paraproduct& correction() const { return pi_; }
    SampledFunction apply(const SampledFunction& f) const;
    double pairing(const SampledFunction& eta, PairingSide side) const;
    double battery_max(PairingSide side) const;

private:
    CzoKernel T_;
    SampledFunction t1_;
    Paraproduct pi_;
    SampledFunction pi_one_;
    SampledFunction pi_adj_one_;
};

CorrectedOperator correct_operator(const CzoKernel& T, const FilterBank& bank, const CubeLattice& lattice);

struct HarnessReport {
    std::vector<double> ratios;   // hardy_norm(Tf) / hardy_norm(f), NaN for f = 0
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    double gate_value = 0.0;      // pairing battery max on the T*1 side
    bool finite = false;
};

// Requires 1/(1+eps) < p- and p+ <= 1 (PreconditionError) and a vanishing T*1 battery (GateRefusal).
HarnessReport hardy_boundedness_harness(const CzoKernel& T, const ExponentFunction& p,
                                        std::span<const SampledFunction> corpus, const FilterBank& bank,
                                        const CubeLattice& lattice);

// Both maxima positive and within a factor of each other.
bool refinement_stable(double a, double b, double factor = 2.0);

} // namespace vh
