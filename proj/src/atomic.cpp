#include "vh/atomic.hpp"

#include "vh/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vh {

LevelSets LevelSets::from_maximal(const Grid& grid, std::vector<double> maximal) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : maximal) {
        hi = std::max(hi, v);
        if (v > 0.0) lo = std::min(lo, v);
    }
    if (hi == 0.0) {
        LevelSets empty(grid);
        empty.maximal_ = std::move(maximal);
        return empty;
    }
    const int l_max = static_cast<int>(std::ceil(std::log2(hi)));
    const int l_min = std::max(static_cast<int>(std::floor(std::log2(lo))), l_max - 80);
    return from_maximal(grid, std::move(maximal), l_min, l_max);
}

LevelSets LevelSets::from_maximal(const Grid& grid, std::vector<double> maximal, int l_min, int l_max) {
    if (maximal.size() != grid.size()) throw ConfigError("maximal function length does not match grid");
    LevelSets s(grid);
    s.maximal_ = std::move(maximal);
    s.l_min_ = l_min;
    s.l_max_ = l_max;
    const auto cfg = MaximalConfig::full(grid);
    std::vector<double> chi(grid.size());
    for (int l = l_min; l <= l_max; ++l) {
        const double t = std::ldexp(1.0, l);
        std::vector<std::uint8_t> om(grid.size());
        std::size_t count = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            om[i] = s.maximal_[i] > t ? 1 : 0;
            chi[i] = om[i];
            count += om[i];
        }
        const auto mchi = hl_maximal(chi, cfg);
        std::vector<std::uint8_t> ot(grid.size());
        std::size_t tcount = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ot[i] = (mchi[i] > dilation_threshold || om[i]) ? 1 : 0;
            tcount += ot[i];
        }
        if (count > 0)
            s.dilation_constant_ = std::max(s.dilation_constant_,
                                            static_cast<double>(tcount) / static_cast<double>(count));
        s.omega_.push_back(std::move(om));
        s.omega_tilde_.push_back(std::move(ot));
    }
    return s;
}

bool LevelSets::in_omega(int l, std::size_t i) const { return maximal_[i] > std::ldexp(1.0, l); }

bool LevelSets::in_omega_tilde(int l, std::size_t i) const {
    if (l < l_min_) return true;
    if (l > l_max_) return false;
    return omega_tilde_[static_cast<std::size_t>(l - l_min_)][i] != 0;
}

std::size_t LevelSets::omega_count(int l) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < maximal_.size(); ++i) c += in_omega(l, i) ? 1 : 0;
    return c;
}

std::size_t LevelSets::omega_tilde_count(int l) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < maximal_.size(); ++i) c += in_omega_tilde(l, i) ? 1 : 0;
    return c;
}

LevelSets level_sets(const SampledFunction& f, const FilterBank& bank) {
    const auto m = smooth_maximal(f, bank);
    return LevelSets::from_maximal(f.grid(), m.vector());
}

CubeSelection select_cubes(const LevelSets& levels, const CubeLattice& lattice) {
    if (!(levels.grid() == lattice.grid())) throw ConfigError("level sets and lattice on different grids");
    CubeSelection sel;
    const auto scales = static_cast<std::size_t>(lattice.scale_count());
    sel.level.resize(scales);
    sel.folded.resize(scales);
    sel.owner.resize(scales);
    if (levels.empty()) return sel;

    const auto m = levels.maximal();
    std::vector<double> buf;
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        const auto s = static_cast<std::size_t>(j - lattice.j_min());
        const auto cubes = lattice.cubes(j);
        sel.level[s].resize(cubes.size());
        sel.folded[s].assign(cubes.size(), 0);
        sel.owner[s].assign(cubes.size(), 0);
        for (std::size_t q = 0; q < cubes.size(); ++q) {
            // |Q cap Omega_l| > |Q|/2 iff the (floor(n/2)+1)-th largest value exceeds 2^l.
            buf.assign(m.begin() + static_cast<long>(cubes[q].first),
                       m.begin() + static_cast<long>(cubes[q].first + cubes[q].count));
            const std::size_t rank = cubes[q].count / 2;
            std::nth_element(buf.begin(), buf.begin() + static_cast<long>(rank), buf.end(), std::greater<>());
            const double v = buf[rank];
            int l = levels.l_min() - 1;
            if (v > 0.0) {
                l = static_cast<int>(std::floor(std::log2(v)));
                while (std::ldexp(1.0, l) >= v) --l;
                while (std::ldexp(1.0, l + 1) < v) ++l;
            }
            if (l < levels.l_min()) {
                ++sel.unassigned;
                sel.folded[s][q] = 1;
                l = levels.l_min();
            }
            sel.level[s][q] = std::min(l, levels.l_max());
        }
    }

    // Maximal cubes: no coarser ancestor carries the same level.
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        const auto s = static_cast<std::size_t>(j - lattice.j_min());
        const auto cubes = lattice.cubes(j);
        for (std::size_t q = 0; q < cubes.size(); ++q) {
            const int l = sel.level[s][q];
            bool is_max = true;
            for (int a = lattice.j_min(); a < j && is_max; ++a) {
                const auto pos = lattice.position(lattice.ancestor(cubes[q], a));
                if (sel.level[static_cast<std::size_t>(a - lattice.j_min())][pos] == l) {
                    is_max = false;
                    sel.owner[s][q] = sel.owner[static_cast<std::size_t>(a - lattice.j_min())][pos];
                }
            }
            if (is_max) {
                sel.owner[s][q] = sel.maximal.size();
                sel.maximal.push_back({j, q});
                sel.maximal_level.push_back(l);
            }
        }
    }
    return sel;
}

SelectionAudit audit_selection(const LevelSets& levels, const CubeSelection& sel, const CubeLattice& lattice) {
    SelectionAudit a;
    if (levels.empty()) {
        a.pass = true;
        return a;
    }
    const auto m = levels.maximal();
    const std::size_t M = lattice.grid().size();
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        const auto s = static_cast<std::size_t>(j - lattice.j_min());
        const auto cubes = lattice.cubes(j);
        for (std::size_t q = 0; q < cubes.size(); ++q) {
            if (sel.folded[s][q]) continue;
            const int l = sel.level[s][q];
            const auto& c = cubes[q];
            // E = Q cap Omega~_l minus Omega_{l+1}; anchor x_Q is its first sample.
            std::size_t anchor = c.center_sample;
            bool found = false;
            // Local window of three cube widths; M over it is a lower bound for M on the line.
            const std::size_t lo = c.first >= c.count ? c.first - c.count : 0;
            const std::size_t hi = std::min(M, c.first + 2 * c.count);
            std::vector<double> chi(hi - lo, 0.0);
            for (std::size_t i = c.first; i < c.first + c.count; ++i) {
                if (levels.in_omega_tilde(l, i) && !levels.in_omega(l + 1, i)) {
                    chi[i - lo] = 1.0;
                    if (!found) {
                        anchor = i;
                        found = true;
                    }
                }
            }
            a.anchor_ratio = std::max(a.anchor_ratio, m[anchor] / std::ldexp(1.0, l + 1));
            MaximalConfig cfg;
            for (std::size_t w = 1; w <= chi.size(); w *= 2) cfg.window_lengths.push_back(w);
            const auto m1 = hl_maximal(chi, cfg);
            const auto m2 = hl_maximal(m1, cfg);
            for (std::size_t i = c.first; i < c.first + c.count; ++i) {
                const double rhs = 4.0 * m2[i - lo];
                a.covering_ratio = std::max(a.covering_ratio,
                                            rhs > 0.0 ? 1.0 / rhs : std::numeric_limits<double>::infinity());
            }
            ++a.cubes_checked;
        }
    }
    a.pass = a.anchor_ratio <= 1.0 && a.covering_ratio <= 1.0;
    return a;
}

SampledFunction Atom::values() const {
    std::vector<double> v(grid.size(), 0.0);
    std::copy(window.begin(), window.end(), v.begin() + static_cast<long>(first));
    return {grid, std::move(v), grid.half_width()};
}

Atom Atom::from_function(const SampledFunction& a, const DyadicCube& cube, SampleRange qstar, double q) {
    Atom at(a.grid());
    at.cube = cube;
    at.qstar = qstar;
    at.q = q;
    std::size_t lo = a.size();
    std::size_t hi = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0.0) {
            lo = std::min(lo, i);
            hi = i + 1;
        }
    if (hi > lo) {
        at.first = lo;
        at.window.assign(a.values().begin() + static_cast<long>(lo), a.values().begin() + static_cast<long>(hi));
    }
    return at;
}

SampleRange dilated_window(const Grid& grid, const DyadicCube& cube, double factor) {
    const double half = 0.5 * factor * cube.side;
    return samples_in(grid, cube.center - half, cube.center + half);
}

AtomCheck atom_validate(const Atom& a, const ExponentFunction& p, double q, int d, double tol) {
    AtomCheck r;
    const Grid& grid = a.grid;
    const double h = grid.spacing();
    r.support_ok = true;
    for (std::size_t k = 0; k < a.window.size(); ++k) {
        const std::size_t i = a.first + k;
        if (a.window[k] != 0.0 && (i < a.qstar.first || i >= a.qstar.first + a.qstar.count)) r.support_ok = false;
    }
    double s = 0.0;
    for (double v : a.window) s += std::pow(std::abs(v), q);
    r.norm = std::pow(s * h, 1.0 / q);
    const double chi = indicator_norm(p, a.qstar.first, a.qstar.count);
    r.bound = chi > 0.0 ? std::pow(static_cast<double>(a.qstar.count) * h, 1.0 / q) / chi : 0.0;
    r.norm_ok = r.norm <= r.bound * (1.0 + tol);
    r.moments_ok = true;
    for (int alpha = 0; alpha <= d; ++alpha) {
        double m = 0.0;
        for (std::size_t k = 0; k < a.window.size(); ++k)
            m += a.window[k] * std::pow(grid.point(a.first + k), alpha);
        m *= h;
        const double rel = r.norm > 0.0 ? std::abs(m) / r.norm : std::abs(m);
        r.worst_moment = std::max(r.worst_moment, rel);
        if (std::abs(m) > tol * r.norm) r.moments_ok = false;
    }
    return r;
}

int minimal_moment_order(const ExponentFunction& p) {
    // Smallest d >= 0 with p-(n + d + 1) > n, n = 1.
    const double bound = 1.0 / p.p_minus() - 2.0;
    return std::max(0, static_cast<int>(std::floor(bound)) + 1);
}

namespace {

// Removes polynomials of degree <= d from v in L^2 over its samples.
std::vector<double> project_moments(std::vector<double> v, const Grid& grid, std::size_t first, int d) {
    const std::size_t n = v.size();
    if (n == 0) return v;
    const double c = grid.point(first) + 0.5 * static_cast<double>(n - 1) * grid.spacing();
    const double half = std::max(0.5 * static_cast<double>(n) * grid.spacing(), grid.spacing());
    const int dim = std::min<int>(d + 1, static_cast<int>(n));
    Eigen::MatrixXd B(static_cast<Eigen::Index>(n), dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (grid.point(first + i) - c) / half;
        double ua = 1.0;
        for (int a = 0; a < dim; ++a) {
            B(static_cast<Eigen::Index>(i), a) = ua;
            ua *= u;
        }
    }
    const Eigen::Map<Eigen::VectorXd> y(v.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd coef = B.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd fit = B * coef;
    for (std::size_t i = 0; i < n; ++i) v[i] -= fit(static_cast<Eigen::Index>(i));
    return v;
}

} // namespace

AtomicDecomposition atomic_decompose(const SampledFunction& f, const ExponentFunction& p,
                                     const FilterBank& bank, const CubeLattice& lattice, double q,
                                     std::optional<int> d_opt) {
    if (p.p_plus() > 1.0) throw PreconditionError("atomic decomposition needs p+ <= 1");
    if (!p.log_holder().pass) throw PreconditionError("atomic decomposition needs a log-Holder exponent");
    if (q != 2.0) throw PreconditionError("atomic decomposition is implemented for q = 2");
    require_compatible(bank, lattice);
    const int d_min = minimal_moment_order(p);
    const int d = d_opt.value_or(d_min);
    if (d < d_min) throw PreconditionError("moment order below the minimal order for this exponent");

    const Grid& grid = f.grid();
    const double h = grid.spacing();
    AtomicDecomposition dec;
    dec.moment_order = d;
    dec.source_norm = f.l2_norm();
    dec.source_lp_norm = luxemburg_norm(f, p);
    if (f.is_zero()) return dec;

    const auto levels = level_sets(f, bank);
    const auto sel = select_cubes(levels, lattice);
    const auto coeffs = analyze(f, bank, lattice);
    dec.dilation_constant = levels.dilation_constant();
    dec.unassigned = sel.unassigned;
    dec.l_min = levels.l_min();
    dec.l_max = levels.l_max();

    // Group members per maximal cube, scale-major.
    std::vector<std::vector<CubeRef>> groups(sel.maximal.size());
    for (int j = lattice.j_min(); j <= lattice.j_max(); ++j) {
        const auto s = static_cast<std::size_t>(j - lattice.j_min());
        for (std::size_t q2 = 0; q2 < sel.owner[s].size(); ++q2) groups[sel.owner[s][q2]].push_back({j, q2});
    }

    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& top = lattice.cubes(sel.maximal[g].scale)[sel.maximal[g].position];
        double energy = 0.0;
        for (const auto& ref : groups[g]) {
            const double c = coeffs.at(ref.scale, ref.position);
            energy += lattice.cubes(ref.scale)[ref.position].side * c * c;
        }
        if (energy == 0.0) continue;
        const SampleRange star = dilated_window(grid, top);
        const double chi = indicator_norm(p, star.first, star.count);
        const double measure = static_cast<double>(star.count) * h;
        const double lambda = std::sqrt(energy) / std::sqrt(measure) * chi;

        std::vector<double> w(star.count, 0.0);
        for (const auto& ref : groups[g]) {
            const auto& cube = lattice.cubes(ref.scale)[ref.position];
            const double amp = cube.side * coeffs.at(ref.scale, ref.position) / lambda;
            const auto ker = bank.kernel(FilterKind::Psi, ref.scale);
            const long n = static_cast<long>(ker.size());
            const long c = static_cast<long>(cube.center_sample);
            for (std::size_t k = 0; k < w.size(); ++k) {
                const long off = ((static_cast<long>(star.first + k) - c) % n + n) % n;
                w[k] += amp * ker[static_cast<std::size_t>(off)];
            }
        }
        w = project_moments(std::move(w), grid, star.first, d);

        Atom atom(grid);
        atom.first = star.first;
        atom.window = std::move(w);
        atom.qstar = star;
        atom.cube = top;
        atom.level = sel.maximal_level[g];
        atom.q = q;
        atom.norm_certificate = std::pow(measure, 1.0 / q) / chi;
        for (int alpha = 0; alpha <= d; ++alpha) {
            double m = 0.0;
            for (std::size_t k = 0; k < atom.window.size(); ++k)
                m += atom.window[k] * std::pow(grid.point(atom.first + k), alpha);
            atom.moment_residuals.push_back(m * h);
        }
        dec.atoms.push_back(std::move(atom));
        dec.lambdas.push_back(lambda);
    }

    const auto rec = reconstruct(dec, grid);
    dec.defect_l2 = relative_l2_error(rec, f);
    dec.defect_lp = dec.source_lp_norm > 0.0 ? luxemburg_norm(rec - f, p) / dec.source_lp_norm : 0.0;
    dec.a_functional = a_functional(dec, p);
    return dec;
}

double a_functional(std::span<const double> lambdas, std::span<const SampleRange> cubes,
                    const ExponentFunction& p) {
    if (lambdas.size() != cubes.size()) throw DomainError("lambda and cube lists differ in length");
    const Grid& grid = p.grid();
    const double pm = p.p_minus();
    std::vector<double> acc(grid.size(), 0.0);
    bool any = false;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (lambdas[k] == 0.0 || cubes[k].count == 0) continue;
        const double chi = indicator_norm(p, cubes[k].first, cubes[k].count);
        const double v = std::pow(std::abs(lambdas[k]) / chi, pm);
        for (std::size_t i = cubes[k].first; i < cubes[k].first + cubes[k].count; ++i) acc[i] += v;
        any = true;
    }
    if (!any) return 0.0;
    for (double& v : acc) v = std::pow(v, 1.0 / pm);
    return luxemburg_norm(acc, grid.spacing(), p.samples());
}

double a_functional(const AtomicDecomposition& dec, const ExponentFunction& p) {
    std::vector<SampleRange> cubes;
    cubes.reserve(dec.atoms.size());
    for (const auto& a : dec.atoms) cubes.push_back(a.qstar);
    return a_functional(dec.lambdas, cubes, p);
}

SampledFunction reconstruct(const AtomicDecomposition& dec, const Grid& grid) {
    std::vector<std::size_t> order(dec.atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(dec.lambdas[a]) > std::abs(dec.lambdas[b]);
    });
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k : order) {
        const auto& atom = dec.atoms[k];
        for (std::size_t i = 0; i < atom.window.size(); ++i) out[atom.first + i] += dec.lambdas[k] * atom.window[i];
    }
    return {grid, std::move(out), grid.half_width()};
}

} // namespace vh
