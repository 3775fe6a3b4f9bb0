#include "vh/grid.hpp"

#include "vh/errors.hpp"
#include "vh/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vh {

Grid Grid::make(double half_width, int level) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw ConfigError("grid half-width must be positive, got " + std::to_string(half_width));
    if (level < 4 || level > 24)
        throw ConfigError("grid level must lie in [4, 24], got " + std::to_string(level));
    return Grid(half_width, level);
}

Grid make_grid(double half_width, int level) { return Grid::make(half_width, level); }

std::size_t Grid::index_of(double x) const {
    if (!contains(x)) throw DomainError("point outside grid domain");
    const auto i = static_cast<std::size_t>(std::floor((x + R_) / h_));
    return std::min(i, size() - 1);
}

SampledFunction::SampledFunction(Grid grid, std::vector<double> values, double support_radius)
    : grid_(grid), values_(std::move(values)), support_radius_(support_radius) {
    if (values_.size() != grid_.size()) throw ConfigError("sample count does not match grid size");
    if (!(support_radius_ >= 0.0) || support_radius_ > grid_.half_width())
        support_radius_ = std::clamp(support_radius_, 0.0, grid_.half_width());
    double peak = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw NumericalIntegrityError("non-finite sample value");
        peak = std::max(peak, std::abs(v));
    }
    const double zero_tol = 64.0 * std::numeric_limits<double>::epsilon() * peak;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (std::abs(grid_.point(i)) > support_radius_ && std::abs(values_[i]) > zero_tol)
            throw DomainError("sample outside declared support radius");
}

SampledFunction::SampledFunction(Grid grid)
    : grid_(grid), values_(grid.size(), 0.0), support_radius_(grid.half_width()) {}

SampledFunction SampledFunction::sample(Grid grid, const std::function<double(double)>& fn,
                                        double support_radius) {
    std::vector<double> v(grid.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = grid.point(i);
        if (std::abs(x) <= support_radius) v[i] = fn(x);
    }
    return {grid, std::move(v), support_radius};
}

double SampledFunction::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.spacing();
}

double SampledFunction::l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s * grid_.spacing());
}

double SampledFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool SampledFunction::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

namespace {
void require_same_grid(const SampledFunction& a, const SampledFunction& b) {
    if (!(a.grid() == b.grid())) throw ConfigError("functions live on different grids");
}
} // namespace

SampledFunction SampledFunction::operator+(const SampledFunction& o) const {
    require_same_grid(*this, o);
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
    return {grid_, std::move(v), std::max(support_radius_, o.support_radius_)};
}

SampledFunction SampledFunction::operator-(const SampledFunction& o) const {
    return *this + o * -1.0;
}

SampledFunction SampledFunction::operator*(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return {grid_, std::move(v), support_radius_};
}

SampledFunction SampledFunction::abs() const {
    std::vector<double> v(values_);
    for (double& x : v) x = std::abs(x);
    return {grid_, std::move(v), support_radius_};
}

double inner_product(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid().spacing();
}

double relative_l2_error(const SampledFunction& approx, const SampledFunction& exact) {
    const double denom = exact.l2_norm();
    const double num = (approx - exact).l2_norm();
    return denom > 0.0 ? num / denom : num;
}

namespace {

// Linear interpolation of samples on the grid, zero outside [-R, R).
double interpolate(const SampledFunction& g, double s) {
    const Grid& grid = g.grid();
    const double pos = (s + grid.half_width()) / grid.spacing();
    if (pos < 0.0 || pos > static_cast<double>(grid.size() - 1)) return 0.0;
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    const double t = pos - static_cast<double>(i0);
    if (t == 0.0 || i0 + 1 >= grid.size()) return g[i0];
    return (1.0 - t) * g[i0] + t * g[i0 + 1];
}

} // namespace

SampledFunction convolve_scaled(const SampledFunction& f, const SampledFunction& g, int j) {
    require_same_grid(f, g);
    const Grid& grid = f.grid();
    const double width = std::ldexp(1.0, -j);
    if (width < 4.0 * grid.spacing() || width > grid.half_width())
        throw ScaleRangeError("scale 2^-" + std::to_string(j) + " not resolvable on this grid");

    const std::size_t M = grid.size();
    const std::size_t n = 2 * M;
    const double h = grid.spacing();
    const double amp = std::ldexp(1.0, j);

    std::vector<double> kernel(n, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        const double t = static_cast<double>(m) * h;
        kernel[m] = amp * interpolate(g, amp * t);
        if (m > 0) kernel[n - m] = amp * interpolate(g, -amp * t);
    }

    auto F = fft::forward(fft::zero_pad(f.values(), n));
    const auto K = fft::forward(kernel);
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= K[k] * h;
    auto out = fft::inverse(F, n);
    out.resize(M);

    const double support = std::min(grid.half_width(), f.support_radius() + g.support_radius() * width);
    return {grid, std::move(out), support};
}

SampleRange samples_in(const Grid& grid, double a, double b) {
    const double R = grid.half_width();
    const double h = grid.spacing();
    const double lo = std::clamp(std::ceil((a + R) / h - 1e-9), 0.0, static_cast<double>(grid.size()));
    const double hi = std::clamp(std::ceil((b + R) / h - 1e-9), 0.0, static_cast<double>(grid.size()));
    SampleRange r;
    r.first = static_cast<std::size_t>(lo);
    r.count = hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
    return r;
}

CubeLattice build_lattice(const Grid& grid, int N, int j_min, int j_max) {
    if (j_min > j_max) throw ConfigError("lattice scale range is empty");
    if (N < 0) throw ConfigError("lattice shift N must be nonnegative");
    const double R = grid.half_width();
    const double h = grid.spacing();
    CubeLattice lat(grid, N, j_min, j_max);
    for (int j = j_min; j <= j_max; ++j) {
        const double side = std::ldexp(1.0, -j - N);
        const double per_cube = side / h;
        const double cubes = 2.0 * R / side;
        if (per_cube < 2.0)
            throw ConfigError("scale " + std::to_string(j) + " too fine: cubes need at least two samples");
        if (side > R)
            throw ConfigError("scale " + std::to_string(j) + " too coarse: cube side exceeds R");
        if (per_cube != std::floor(per_cube) || cubes != std::floor(cubes) ||
            std::fmod(R, side) != 0.0)
            throw ConfigError("grid and dyadic lattice are not commensurate at scale " + std::to_string(j));
        const auto count = static_cast<std::size_t>(per_cube);
        const long k0 = -static_cast<long>(R / side);
        std::vector<DyadicCube> row(static_cast<std::size_t>(cubes));
        for (std::size_t c = 0; c < row.size(); ++c) {
            DyadicCube& q = row[c];
            q.scale = j;
            q.index = k0 + static_cast<long>(c);
            q.side = side;
            q.center = (static_cast<double>(q.index) + 0.5) * side;
            q.first = c * count;
            q.count = count;
            q.center_sample = q.first + count / 2;
        }
        lat.scales_.push_back(std::move(row));
    }
    return lat;
}

std::span<const DyadicCube> CubeLattice::cubes(int j) const {
    if (j < j_min_ || j > j_max_) throw ScaleRangeError("scale outside lattice range");
    return scales_[static_cast<std::size_t>(j - j_min_)];
}

std::size_t CubeLattice::cube_of_sample(int j, std::size_t i) const {
    const auto row = cubes(j);
    return i / row.front().count;
}

bool CubeLattice::contains(const DyadicCube& outer, const DyadicCube& inner) {
    if (inner.scale < outer.scale) return false;
    // Arithmetic shift is floor division for negative indices.
    return (inner.index >> (inner.scale - outer.scale)) == outer.index;
}

std::size_t CubeLattice::position(const DyadicCube& c) const {
    const auto row = cubes(c.scale);
    return static_cast<std::size_t>(c.index - row.front().index);
}

const DyadicCube& CubeLattice::ancestor(const DyadicCube& inner, int j) const {
    if (j > inner.scale) throw DomainError("ancestor scale finer than cube");
    const long idx = inner.index >> (inner.scale - j);
    const auto row = cubes(j);
    return row[static_cast<std::size_t>(idx - row.front().index)];
}

} // namespace vh
