#pragma once

#include "vh/calderon.hpp"
#include "vh/filterbank.hpp"
#include "vh/grid.hpp"
#include "vh/maximal.hpp"
#include "vh/varexp.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vh {

// Omega_l = {M_phi f > 2^l}, Omega~_l = {M chi_{Omega_l} > 1/1000}, l in [l_min, l_max].
class LevelSets {
public:
    static constexpr double dilation_threshold = 1e-3;

    // Levels from floor(log2 min) to ceil(log2 max) of the given maximal function.
    static LevelSets from_maximal(const Grid& grid, std::vector<double> maximal);
    static LevelSets from_maximal(const Grid& grid, std::vector<double> maximal, int l_min, int l_max);

    const Grid& grid() const { return grid_; }
    bool empty() const { return l_max_ < l_min_; }
    int l_min() const { return l_min_; }
    int l_max() const { return l_max_; }
    std::span<const double> maximal() const { return maximal_; }
    // Membership masks; levels outside [l_min, l_max] behave as full (below) or empty (above).
    bool in_omega(int l, std::size_t i) const;
    bool in_omega_tilde(int l, std::size_t i) const;
    std::size_t omega_count(int l) const;
    std::size_t omega_tilde_count(int l) const;
    // max over nonempty levels of |Omega~_l| / |Omega_l|
    double dilation_constant() const { return dilation_constant_; }

private:
    explicit LevelSets(Grid g) : grid_(g) {}
    Grid grid_;
    int l_min_ = 0;
    int l_max_ = -1;
    std::vector<double> maximal_;
    std::vector<std::vector<std::uint8_t>> omega_;
    std::vector<std::vector<std::uint8_t>> omega_tilde_;
    double dilation_constant_ = 0.0;
};

LevelSets level_sets(const SampledFunction& f, const FilterBank& bank);

struct CubeRef {
    int scale = 0;
    std::size_t position = 0;
    friend bool operator==(const CubeRef&, const CubeRef&) = default;
};

struct CubeSelection {
    // level[j - j_min][position]; folded cubes carry l_min.
    std::vector<std::vector<int>> level;
    std::vector<std::vector<std::uint8_t>> folded;
    std::vector<CubeRef> maximal;            // inclusion-maximal members of each B_l
    std::vector<int> maximal_level;
    std::vector<std::vector<std::size_t>> owner; // index into maximal for each cube
    std::size_t unassigned = 0;

    int level_of(const CubeLattice& lat, CubeRef c) const {
        return level[static_cast<std::size_t>(c.scale - lat.j_min())][c.position];
    }
};

CubeSelection select_cubes(const LevelSets& levels, const CubeLattice& lattice);

struct SelectionAudit {
    std::size_t cubes_checked = 0;
    double anchor_ratio = 0.0;     // max M_phi f(x_Q) / 2^{l+1}
    double covering_ratio = 0.0;   // max chi_Q / (4 M^2 chi_E) on Q
    bool pass = false;
};

SelectionAudit audit_selection(const LevelSets& levels, const CubeSelection& sel, const CubeLattice& lattice);

struct Atom {
    explicit Atom(Grid g) : grid(g) {}

    Grid grid;
    std::size_t first = 0;          // first sample of the stored window
    std::vector<double> window;     // values on [first, first + window.size())
    SampleRange qstar;              // dilated cube clipped to the domain
    DyadicCube cube;                // generating cube
    int level = 0;
    double q = 2.0;
    double norm_certificate = 0.0;  // |Q*|^{1/q} / ||chi_{Q*}||_{p}
    std::vector<double> moment_residuals;

    SampledFunction values() const;
    static Atom from_function(const SampledFunction& a, const DyadicCube& cube, SampleRange qstar, double q);
};

struct AtomCheck {
    bool support_ok = false;
    bool norm_ok = false;
    bool moments_ok = false;
    double norm = 0.0;
    double bound = 0.0;
    double worst_moment = 0.0;   // max |int a x^a| / ||a||_q
    bool pass() const { return support_ok && norm_ok && moments_ok; }
};

// Norm bound up to a factor 1 + tol; moments up to tol * ||a||_q.
AtomCheck atom_validate(const Atom& a, const ExponentFunction& p, double q, int d, double tol = 1e-6);

// Dilated cube l(Q*) = factor * l(Q) about the center, clipped to the grid.
SampleRange dilated_window(const Grid& grid, const DyadicCube& cube, double factor = 100.0);

struct AtomicDecomposition {
    std::vector<Atom> atoms;
    std::vector<double> lambdas;
    double source_norm = 0.0;         // ||f||_{L^2}
    double source_lp_norm = 0.0;      // ||f||_{L^p}
    double defect_l2 = 0.0;           // relative
    double defect_lp = 0.0;           // relative Luxemburg defect
    double a_functional = 0.0;
    double dilation_constant = 0.0;
    std::size_t unassigned = 0;
    int l_min = 0;
    int l_max = -1;
    int moment_order = 0;
};

int minimal_moment_order(const ExponentFunction& p);

AtomicDecomposition atomic_decompose(const SampledFunction& f, const ExponentFunction& p,
                                     const FilterBank& bank, const CubeLattice& lattice, double q = 2.0,
                                     std::optional<int> d = std::nullopt);

double a_functional(std::span<const double> lambdas, std::span<const SampleRange> cubes,
                    const ExponentFunction& p);
double a_functional(const AtomicDecomposition& dec, const ExponentFunction& p);

SampledFunction reconstruct(const AtomicDecomposition& dec, const Grid& grid);

} // namespace vh
