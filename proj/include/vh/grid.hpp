#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vh {

// Uniform grid x_i = -R + i h on [-R, R), 2^L points.
class Grid {
public:
    static constexpr int dimension = 1;

    static Grid make(double half_width, int level);

    double half_width() const { return R_; }
    int level() const { return L_; }
    std::size_t size() const { return std::size_t{1} << L_; }
    double spacing() const { return h_; }
    double point(std::size_t i) const { return -R_ + static_cast<double>(i) * h_; }
    // Index of the sample cell containing x; x must lie in [-R, R).
    std::size_t index_of(double x) const;
    bool contains(double x) const { return x >= -R_ && x < R_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Grid(double R, int L) : R_(R), L_(L), h_(2.0 * R / static_cast<double>(std::size_t{1} << L)) {}
    double R_;
    int L_;
    double h_;
};

Grid make_grid(double half_width, int level);

class SampledFunction {
public:
    SampledFunction(Grid grid, std::vector<double> values, double support_radius);
    // Zero function with full support.
    explicit SampledFunction(Grid grid);

    // Samples fn at grid points with |x| <= support_radius; zero elsewhere.
    static SampledFunction sample(Grid grid, const std::function<double(double)>& fn,
                                  double support_radius);
    static SampledFunction sample(Grid grid, const std::function<double(double)>& fn) {
        return sample(grid, fn, grid.half_width());
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& vector() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double support_radius() const { return support_radius_; }

    double integral() const;
    double l2_norm() const;
    double sup_norm() const;
    bool is_zero() const;

    SampledFunction operator+(const SampledFunction& o) const;
    SampledFunction operator-(const SampledFunction& o) const;
    SampledFunction operator*(double c) const;
    friend SampledFunction operator*(double c, const SampledFunction& f) { return f * c; }
    SampledFunction abs() const;

private:
    Grid grid_;
    std::vector<double> values_;
    double support_radius_;
};

double inner_product(const SampledFunction& a, const SampledFunction& b);
double relative_l2_error(const SampledFunction& approx, const SampledFunction& exact);

// g_j * f with g_j(x) = 2^j g(2^j x); linear convolution via zero-padded FFT.
SampledFunction convolve_scaled(const SampledFunction& f, const SampledFunction& g, int j);

struct DyadicCube {
    int scale = 0;
    long index = 0;          // cube is [index*side, (index+1)*side)
    double side = 0.0;
    double center = 0.0;
    std::size_t first = 0;   // first grid sample in the cube
    std::size_t count = 0;   // number of grid samples
    std::size_t center_sample = 0;

    double left() const { return static_cast<double>(index) * side; }
    double measure() const { return side; }
};

class CubeLattice {
public:
    const Grid& grid() const { return grid_; }
    int shift() const { return N_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }
    int scale_count() const { return j_max_ - j_min_ + 1; }
    std::span<const DyadicCube> cubes(int j) const;
    // Position of the cube at scale j containing sample i.
    std::size_t cube_of_sample(int j, std::size_t i) const;
    // Exact containment from integer indices.
    static bool contains(const DyadicCube& outer, const DyadicCube& inner);
    // Parent cube at scale j of an inner cube (j <= inner.scale).
    const DyadicCube& ancestor(const DyadicCube& inner, int j) const;
    std::size_t position(const DyadicCube& c) const;

    friend CubeLattice build_lattice(const Grid& grid, int N, int j_min, int j_max);

private:
    CubeLattice(Grid g, int N, int jmin, int jmax) : grid_(g), N_(N), j_min_(jmin), j_max_(jmax) {}
    Grid grid_;
    int N_;
    int j_min_;
    int j_max_;
    std::vector<std::vector<DyadicCube>> scales_;
};

CubeLattice build_lattice(const Grid& grid, int N, int j_min, int j_max);

// Monotone sample window [first, first+count) of grid points inside [a, b).
struct SampleRange {
    std::size_t first = 0;
    std::size_t count = 0;
};
SampleRange samples_in(const Grid& grid, double a, double b);

} // namespace vh
