#include "vh/czo.hpp"

#include "vh/errors.hpp"
#include "vh/fft.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

namespace vh {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Node {
    double t;
    double w;
};

void add_panel(std::vector<Node>& nodes, double a, double b) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    for (std::size_t k = 0; k < x.size(); ++k) {
        nodes.push_back({mid - half * x[k], half * w[k]});
        nodes.push_back({mid + half * x[k], half * w[k]});
    }
}

// Gauss-Legendre nodes on (0, S]: geometric panels near 0, then panels of width <= 1/(2 xi_max).
std::vector<Node> half_line_nodes(double support, double xi_max) {
    const double width = std::min(1.0 / 64.0, 0.5 / std::max(xi_max, 1.0));
    std::vector<Node> nodes;
    double a = 1e-12;
    while (2.0 * a < width) {
        add_panel(nodes, a, 2.0 * a);
        a *= 2.0;
    }
    while (a < support) {
        const double b = std::min(support, a + width);
        add_panel(nodes, a, b);
        a = b;
    }
    return nodes;
}

std::size_t next_pow2(double v) {
    std::size_t n = 1;
    while (static_cast<double>(n) < v) n *= 2;
    return n;
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double g0 = std::exp(-1.0 / u);
    const double g1 = std::exp(-1.0 / (1.0 - u));
    return g0 / (g0 + g1);
}

double modulation(double x) { return 1.0 + 0.5 * std::cos(two_pi * x); }

// Weights of the odd offsets m = -reach..reach (index reach + m) for a translation-invariant kernel:
// 2h k(m h), plus endpoint corrections on the first few offsets. With s(t) = t (k(t) - k(-t)) / 2 the odd part
// of the sum is sum_m w_m G(m h), G(t) = (g(x - t) - g(x + t)) / t smooth and even. The corrections make the
// rule exact for s(t) t^{2k} exp(-t^2 / d^2), k < correction_order, which removes the low-order error terms
// when s is not smooth at 0 (e.g. oscillating in log|t|). For s constant near 0 they vanish.
constexpr int correction_order = 4;

std::vector<double> odd_offset_table(const CzoKernel& T, long reach, double h) {
    std::vector<double> w(2 * static_cast<std::size_t>(reach) + 1, 0.0);
    for (long m = 1; m <= reach; m += 2) {
        w[static_cast<std::size_t>(reach + m)] = 2.0 * h * T.profile(static_cast<double>(m) * h);
        w[static_cast<std::size_t>(reach - m)] = 2.0 * h * T.profile(-static_cast<double>(m) * h);
    }
    constexpr int P = correction_order;
    if (reach < 2 * P - 1) return w;
    const double d = 32.0 * h;
    const double unit = 2.0 * P * h;
    auto s_of = [&](double t) { return 0.5 * t * (T.profile(t) - T.profile(-t)); };
    auto basis = [&](double t, int k) { return std::pow(t / unit, 2 * k) * std::exp(-(t * t) / (d * d)); };

    std::vector<Node> nodes;
    for (double b = d / 8.0; b > d * 1e-15; b *= 0.5) add_panel(nodes, 0.5 * b, b);
    for (double a = d / 8.0; a < 8.0 * d; a += d / 16.0) add_panel(nodes, a, a + d / 16.0);

    Eigen::Matrix<double, P, P> V;
    Eigen::Matrix<double, P, 1> r;
    for (int k = 0; k < P; ++k) {
        double integral = 0.0;
        for (const auto& [t, wt] : nodes) integral += wt * s_of(t) * basis(t, k);
        double sum = 0.0;
        for (long m = 1; static_cast<double>(m) * h < 8.0 * d && m <= reach; m += 2) {
            const double t = static_cast<double>(m) * h;
            sum += 2.0 * h * s_of(t) * basis(t, k);
        }
        r(k) = integral - sum;
        for (int q = 0; q < P; ++q) V(k, q) = std::pow(static_cast<double>(2 * q + 1) * h / unit, 2 * k);
    }
    const Eigen::Matrix<double, P, 1> c = V.colPivHouseholderQr().solve(r);
    for (int q = 0; q < P; ++q) {
        const long m = 2 * q + 1;
        // c_q multiplies G(m h) exp(-(m h)^2 / d^2) in the fitted rule.
        const double corr = c(q) * std::exp(-std::pow(static_cast<double>(m) * h / d, 2)) / (static_cast<double>(m) * h);
        w[static_cast<std::size_t>(reach + m)] += corr;
        w[static_cast<std::size_t>(reach - m)] -= corr;
    }
    return w;
}

} // namespace

struct CzoKernel::MultiplierCache {
    std::mutex mutex;
    std::map<std::tuple<std::size_t, double, double>, std::vector<std::complex<double>>> tables;
};

double kernel_cutoff(double t) { return smooth_step((4.0 - std::abs(t)) / 2.0); }

CzoKernel CzoKernel::convolution(std::string name, Profile k, double epsilon, double size_constant,
                                 double support) {
    if (!(support > 0.0) || !std::isfinite(support)) throw ConfigError("convolution kernel needs finite support");
    CzoKernel K;
    K.name_ = std::move(name);
    K.profile_ = std::move(k);
    K.epsilon_ = epsilon;
    K.size_constant_ = size_constant;
    K.support_ = support;
    K.cache_ = std::make_shared<MultiplierCache>();
    return K;
}

CzoKernel CzoKernel::custom(std::string name, Evaluator ev, double epsilon, double size_constant, double support) {
    CzoKernel K;
    K.name_ = std::move(name);
    K.evaluator_ = std::move(ev);
    K.epsilon_ = epsilon;
    K.size_constant_ = size_constant;
    K.support_ = support;
    return K;
}

CzoKernel CzoKernel::modulated(std::string name, Profile left, Profile right, double bandwidth) const {
    if (!profile_) throw ConfigError("only convolution kernels can be modulated");
    CzoKernel K = *this;
    K.name_ = std::move(name);
    K.left_ = std::move(left);
    K.right_ = std::move(right);
    K.bandwidth_ = bandwidth;
    double bound = 1.0;
    for (const auto& a : {K.left_, K.right_}) {
        if (!a) continue;
        double s = 0.0;
        for (int i = 0; i <= 4096; ++i) s = std::max(s, std::abs(a(-8.0 + 16.0 * i / 4096.0)));
        bound *= s;
    }
    K.size_constant_ = size_constant_ * bound;
    return K;
}

CzoKernel CzoKernel::scaled(double c) const {
    CzoKernel K = *this;
    K.scale_ *= c;
    return K;
}

double CzoKernel::operator()(double x, double y) const {
    if (x == y) throw DomainError("kernel is singular on the diagonal");
    if (!profile_) return scale_ * evaluator_(x, y);
    double v = scale_ * profile_(x - y);
    if (left_) v *= left_(x);
    if (right_) v *= right_(y);
    return v;
}

double CzoKernel::profile(double t) const {
    if (!profile_) throw DomainError("kernel has no convolution profile");
    return scale_ * profile_(t);
}

std::complex<double> CzoKernel::multiplier(double xi) const {
    if (!profile_) throw DomainError("kernel has no multiplier");
    std::complex<double> m = 0.0;
    for (const auto& [t, w] : half_line_nodes(support_, std::abs(xi))) {
        const double even = profile_(t) + profile_(-t);
        const double odd = profile_(t) - profile_(-t);
        m += w * std::complex<double>(even * std::cos(two_pi * xi * t), -odd * std::sin(two_pi * xi * t));
    }
    return scale_ * m;
}

std::vector<std::complex<double>> multiplier_table(const CzoKernel& K, std::size_t n, double h, double xi_cut) {
    if (!K.profile_) throw DomainError("kernel has no multiplier");
    const std::size_t bins = n / 2 + 1;
    const double nyquist = 0.5 / h;
    const double top = std::min(nyquist, xi_cut);
    const auto key = std::make_tuple(n, h, top);
    std::vector<std::complex<double>> table;
    {
        std::lock_guard lock(K.cache_->mutex);
        auto it = K.cache_->tables.find(key);
        if (it != K.cache_->tables.end()) table = it->second;
    }
    if (table.empty()) {
        table.assign(bins, 0.0);
        const auto nodes = half_line_nodes(K.support_, top);
        std::vector<double> even(nodes.size());
        std::vector<double> odd(nodes.size());
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const double a = K.profile_(nodes[q].t);
            const double b = K.profile_(-nodes[q].t);
            even[q] = nodes[q].w * (a + b);
            odd[q] = nodes[q].w * (a - b);
        }
        for (std::size_t k = 0; k < bins; ++k) {
            const double xi = fft::frequency(k, n, h);
            if (std::abs(xi) > top) continue;
            double re = 0.0;
            double im = 0.0;
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const double arg = two_pi * xi * nodes[q].t;
                re += even[q] * std::cos(arg);
                im -= odd[q] * std::sin(arg);
            }
            table[k] = {re, im};
        }
        std::lock_guard lock(K.cache_->mutex);
        K.cache_->tables.emplace(key, table);
    }
    for (auto& v : table) v *= K.scale_;
    return table;
}

std::vector<double> CzoKernel::apply_periodic(std::span<const double> g, double h, double x0,
                                              double xi_cut) const {
    if (!profile_) throw DomainError("kernel has no spectral apply; use apply_kernel");
    const std::size_t n = g.size();
    std::vector<double> buf(g.begin(), g.end());
    if (right_)
        for (std::size_t i = 0; i < n; ++i) buf[i] *= right_(x0 + static_cast<double>(i) * h);
    auto F = fft::forward(buf);
    const auto m = multiplier_table(*this, n, h, xi_cut);
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= m[k];
    auto out = fft::inverse(F, n);
    if (left_)
        for (std::size_t i = 0; i < n; ++i) out[i] *= left_(x0 + static_cast<double>(i) * h);
    return out;
}

SampledFunction CzoKernel::apply(const SampledFunction& f) const {
    if (!profile_) throw DomainError("kernel has no spectral apply; use apply_kernel");
    const Grid& grid = f.grid();
    const double h = grid.spacing();
    const std::size_t M = grid.size();
    const std::size_t n = next_pow2(static_cast<double>(M) + 2.0 * std::ceil(support_ / h) + 2.0);
    std::vector<double> buf(n, 0.0);
    for (std::size_t i = 0; i < M; ++i) buf[i] = right_ ? f[i] * right_(grid.point(i)) : f[i];
    auto F = fft::forward(buf);
    const auto m = multiplier_table(*this, n, h);
    for (std::size_t k = 0; k < F.size(); ++k) F[k] *= m[k];
    auto out = fft::inverse(F, n);
    out.resize(M);
    if (left_)
        for (std::size_t i = 0; i < M; ++i) out[i] *= left_(grid.point(i));
    return {grid, std::move(out), grid.half_width()};
}

std::vector<std::string> zoo_names() {
    return {"hilbert", "mollifier", "modulated_left", "modulated_right", "dilation_modulated"};
}

CzoKernel make_operator(const std::string& name, double scale) {
    const auto hilbert = CzoKernel::convolution(
        "hilbert", [](double t) { return t == 0.0 ? 0.0 : kernel_cutoff(t) / (std::numbers::pi * t); }, 1.0, 2.0,
        4.0);
    CzoKernel K = hilbert;
    if (name == "hilbert") {
        K = hilbert;
    } else if (name == "mollifier") {
        constexpr double sigma = 0.125;
        K = CzoKernel::convolution(
            "mollifier",
            [](double t) { return std::exp(-std::numbers::pi * t * t / (sigma * sigma)) / sigma; }, 1.0, 1.0, 1.0);
    } else if (name == "modulated_left" || name == "modulated_right") {
        // The modulation's slope adds to the smoothness constant; 3 * sup|a| covers the sampled sup of 3.3.
        const auto base = CzoKernel::convolution(
            "hilbert", [](double t) { return t == 0.0 ? 0.0 : kernel_cutoff(t) / (std::numbers::pi * t); }, 1.0, 3.0,
            4.0);
        K = name == "modulated_left" ? base.modulated(name, modulation, nullptr, 1.0)
                                     : base.modulated(name, nullptr, modulation, 1.0);
    } else if (name == "dilation_modulated") {
        K = CzoKernel::convolution(
            "dilation_modulated",
            [](double t) {
                if (t == 0.0) return 0.0;
                const double a = std::abs(t);
                return kernel_cutoff(t) * (1.0 + 0.5 * std::sin(std::log(a))) / t;
            },
            1.0, 8.0, 4.0);
    } else {
        throw ConfigError("unknown operator '" + name + "'");
    }
    return K.scaled(scale);
}

SampledFunction apply_kernel(const CzoKernel& K, const SampledFunction& f) {
    const Grid& grid = f.grid();
    const double h = grid.spacing();
    const long M = static_cast<long>(grid.size());
    const long reach = std::isfinite(K.support()) ? static_cast<long>(std::ceil(K.support() / h)) : M;
    std::vector<double> out(grid.size(), 0.0);
    std::vector<double> table;
    if (K.translation_invariant()) {
        table = odd_offset_table(K, reach, h);
        for (double& v : table) v /= 2.0 * h;
    }
    for (long i = 0; i < M; ++i) {
        const double x = grid.point(static_cast<std::size_t>(i));
        double acc = 0.0;
        for (long m = -reach + ((reach % 2 == 0) ? 1 : 0); m <= reach; m += 2) {
            if (m % 2 == 0) continue;
            const long jdx = i - m;
            if (jdx < 0 || jdx >= M) continue;
            const double fv = f[static_cast<std::size_t>(jdx)];
            if (fv == 0.0) continue;
            double k;
            if (K.translation_invariant()) {
                k = table[static_cast<std::size_t>(reach + m)];
            } else {
                k = K(x, x - static_cast<double>(m) * h);
            }
            acc += k * fv;
        }
        out[static_cast<std::size_t>(i)] = 2.0 * h * acc;
    }
    return {grid, std::move(out), grid.half_width()};
}

KernelConditionReport kernel_condition_check(const CzoKernel& K, std::size_t samples, std::uint64_t seed,
                                             double radius) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-radius, radius);
    const double reach = std::min(std::isfinite(K.support()) ? K.support() : 2.0 * radius, 2.0 * radius);
    std::uniform_real_distribution<double> log_off(std::log(1e-3), std::log(reach));
    std::uniform_real_distribution<double> log_frac(std::log(1e-4), std::log(0.5));
    std::bernoulli_distribution coin(0.5);
    const double eps = K.epsilon();

    KernelConditionReport r;
    r.declared = K.size_constant();
    for (std::size_t s = 0; s < samples; ++s) {
        const double x = pos(rng);
        const double t = (coin(rng) ? 1.0 : -1.0) * std::exp(log_off(rng));
        const double y = x - t;
        r.size_sup = std::max(r.size_sup, std::abs(K(x, y)) * std::abs(t));
        ++r.pairs;

        const double d = (coin(rng) ? 1.0 : -1.0) * std::abs(t) * std::exp(log_frac(rng));
        const double scale = std::pow(std::abs(t), 1.0 + eps) / std::pow(std::abs(d), eps);
        r.smooth_x_sup = std::max(r.smooth_x_sup, std::abs(K(x, y) - K(x + d, y)) * scale);
        r.smooth_y_sup = std::max(r.smooth_y_sup, std::abs(K(x, y) - K(x, y + d)) * scale);
        ++r.triples;
    }
    r.size_ratio = r.declared > 0.0 ? r.size_sup / r.declared : 0.0;
    r.pass = r.size_sup <= r.declared && r.smooth_x_sup <= r.declared && r.smooth_y_sup <= r.declared;
    return r;
}

CoefficientBuffer CoefficientBuffer::for_scales(const Grid& grid, int j_lo) {
    const double period = std::max(8.0 * grid.half_width(), 32.0 * std::ldexp(1.0, -j_lo));
    CoefficientBuffer b;
    b.spacing = grid.spacing();
    b.size = next_pow2(period / b.spacing);
    return b;
}

namespace {

// psi_j(x_i - c) on the buffer, from the exact multiplier.
std::vector<double> psi_on_buffer(const CoefficientBuffer& buf, int j, double c) {
    const std::size_t n = buf.size;
    const double h = buf.spacing;
    fft::Spectrum G(n / 2 + 1);
    for (std::size_t k = 0; k < G.size(); ++k) {
        const double xi = fft::frequency(k, n, h);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        G[k] = sign * FilterBank::psi_hat(std::ldexp(xi, -j)) * std::polar(1.0, -two_pi * xi * c);
    }
    auto v = fft::inverse(G, n);
    for (double& x : v) x /= h;
    return v;
}

// h * sum_u psi_j(x - u) F(u) at every buffer point.
std::vector<double> correlate_psi(const CoefficientBuffer& buf, const fft::Spectrum& F, int j) {
    fft::Spectrum G(F.size());
    for (std::size_t k = 0; k < F.size(); ++k)
        G[k] = F[k] * FilterBank::psi_hat(std::ldexp(fft::frequency(k, buf.size, buf.spacing), -j));
    return fft::inverse(G, buf.size);
}

long reach_in_samples(const CzoKernel& T, const CoefficientBuffer& buf) {
    const long half = static_cast<long>(buf.size / 2) - 1;
    if (!std::isfinite(T.support())) return half;
    return std::min(half, static_cast<long>(std::ceil(T.support() / buf.spacing)));
}

// Principal-value route on the periodic buffer; only points with mask set are evaluated for general kernels.
std::vector<double> kernel_route(const CzoKernel& T, const CoefficientBuffer& buf, const std::vector<double>& g,
                                 const std::vector<std::uint8_t>* mask) {
    const std::size_t n = buf.size;
    const double h = buf.spacing;
    const long reach = reach_in_samples(T, buf);
    if (T.translation_invariant()) {
        const auto w = odd_offset_table(T, reach, h);
        std::vector<double> table(n, 0.0);
        for (long m = 1; m <= reach; m += 2) {
            table[static_cast<std::size_t>(m)] = w[static_cast<std::size_t>(reach + m)];
            table[n - static_cast<std::size_t>(m)] = w[static_cast<std::size_t>(reach - m)];
        }
        auto A = fft::forward(table);
        const auto B = fft::forward(g);
        for (std::size_t k = 0; k < A.size(); ++k) A[k] *= B[k];
        return fft::inverse(A, n);
    }
    std::vector<double> out(n, 0.0);
    const long nn = static_cast<long>(n);
    for (long i = 0; i < nn; ++i) {
        if (mask && !(*mask)[static_cast<std::size_t>(i)]) continue;
        const double x = buf.point(static_cast<std::size_t>(i));
        double acc = 0.0;
        for (long m = -reach + (reach % 2 == 0 ? 1 : 0); m <= reach; m += 2) {
            if (m % 2 == 0) continue;
            const long idx = ((i - m) % nn + nn) % nn;
            const double gv = g[static_cast<std::size_t>(idx)];
            if (gv == 0.0) continue;
            acc += T(x, x - static_cast<double>(m) * h) * gv;
        }
        out[static_cast<std::size_t>(i)] = 2.0 * h * acc;
    }
    return out;
}

// int psi_hat^2 over the line.
double psi_l2_squared() {
    static const double value = [] {
        double s = 0.0;
        const int n = 1 << 16;
        for (int k = 0; k < n; ++k) {
            const double xi = 0.5 + 1.5 * (k + 0.5) / n;
            const double v = FilterBank::psi_hat(xi);
            s += v * v;
        }
        return 2.0 * s * 1.5 / n;
    }();
    return value;
}

double buffer_norm(const std::vector<double>& v, double h) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s * h);
}

} // namespace

MatrixCoefficient matrix_coeff(const CzoKernel& T, const FilterBank& bank, int j, int jp, double xq, double xqp) {
    const Grid& grid = bank.grid();
    for (int s : {j, jp}) {
        const double w = std::ldexp(1.0, -s);
        if (w < 4.0 * grid.spacing()) throw ScaleRangeError("scale " + std::to_string(s) + " not resolvable");
    }
    const auto buf = CoefficientBuffer::for_scales(grid, std::min(j, jp));
    const double h = buf.spacing;
    const auto g = psi_on_buffer(buf, jp, xqp);
    const auto f = psi_on_buffer(buf, j, xq);

    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    std::vector<std::uint8_t> mask(buf.size, 0);
    for (std::size_t i = 0; i < buf.size; ++i) mask[i] = std::abs(f[i]) > 1e-15 * fmax ? 1 : 0;

    MatrixCoefficient c;
    const auto tg = kernel_route(T, buf, g, &mask);
    double a = 0.0;
    for (std::size_t i = 0; i < buf.size; ++i)
        if (mask[i]) a += f[i] * tg[i];
    c.kernel_route = a * h;

    if (T.has_apply()) {
        const double cut = std::ldexp(2.0, std::max(j, jp)) + 2.0 * T.modulation_bandwidth() + 1.0;
        const auto tb = T.apply_periodic(g, h, buf.point(0), cut);
        double b = 0.0;
        for (std::size_t i = 0; i < buf.size; ++i) b += f[i] * tb[i];
        c.apply_route = b * h;
        if (std::isfinite(c.apply_route)) {
            c.cross_checked = true;
            const double scale = buffer_norm(f, h) * buffer_norm(g, h);
            c.gap = std::abs(c.kernel_route - c.apply_route) / scale;
            if (c.gap > route_tolerance)
                throw NumericalIntegrityError("matrix coefficient routes disagree: relative gap " +
                                              std::to_string(c.gap));
        }
    }
    return c;
}

double orthogonality_bound(int j, int jp, double d, double epsilon) {
    const int lo = std::min(j, jp);
    const double side = std::ldexp(1.0, -lo);
    return std::exp2(-std::abs(j - jp) * epsilon) * std::exp2(-lo * epsilon) /
           std::pow(side + std::abs(d), 1.0 + epsilon);
}

OrthogonalityReport almost_orthogonality_check(const CzoKernel& T, const FilterBank& bank,
                                               const CubeLattice& lattice, const OrthogonalityOptions& opt) {
    require_compatible(bank, lattice);
    if (opt.j_lo > opt.j_hi || opt.j_lo < lattice.j_min() || opt.j_hi > lattice.j_max())
        throw ScaleRangeError("orthogonality sweep outside the lattice scale range");
    const Grid& grid = bank.grid();
    OrthogonalityReport rep;
    rep.epsilon = T.epsilon();

    const auto kc = kernel_condition_check(T, 2000, 7);
    const double t1 = pairing_battery_max(T, grid, PairingSide::Right);
    const double t1s = pairing_battery_max(T, grid, PairingSide::Left);
    rep.hypothesis_ok = kc.pass && t1 <= pairing_tolerance && t1s <= pairing_tolerance;
    if (!rep.hypothesis_ok) {
        rep.flagged = true;
        rep.note = !kc.pass ? "kernel conditions fail on samples"
                            : (t1 > pairing_tolerance ? "T1 != 0" : "T*1 != 0");
        return rep;
    }

    const auto buf = CoefficientBuffer::for_scales(grid, opt.j_lo);
    const double h = buf.spacing;
    const double inner = opt.inner_radius > 0.0 ? opt.inner_radius : grid.half_width();
    const auto index_of = [&](double x) {
        return static_cast<std::size_t>(static_cast<long>(buf.size / 2) + std::lround(x / h));
    };

    for (int jp = opt.j_lo; jp <= opt.j_hi; ++jp) {
        std::vector<double> anchors;
        const auto cubes_p = lattice.cubes(jp);
        if (T.translation_invariant()) {
            anchors.push_back(cubes_p[lattice.cube_of_sample(jp, grid.size() / 2)].center);
        } else {
            std::vector<double> inside;
            for (const auto& c : cubes_p)
                if (std::abs(c.center) <= 0.5 * inner) inside.push_back(c.center);
            const std::size_t k = std::min(opt.general_anchors, inside.size());
            for (std::size_t a = 0; a < k; ++a) anchors.push_back(inside[(2 * a + 1) * inside.size() / (2 * k)]);
        }
        std::vector<OrthogonalityRow> rows;
        for (int j = opt.j_lo; j <= opt.j_hi; ++j) rows.push_back({j, jp, 0.0, 0.0, 0, 0.0});

        for (double a : anchors) {
            const auto g = psi_on_buffer(buf, jp, a);
            const double gnorm = buffer_norm(g, h);
            const auto tg = kernel_route(T, buf, g, nullptr);
            const auto TA = fft::forward(tg);
            fft::Spectrum TB;
            if (T.has_apply()) {
                const double cut = std::ldexp(2.0, opt.j_hi) + 2.0 * T.modulation_bandwidth() + 1.0;
                TB = fft::forward(T.apply_periodic(g, h, buf.point(0), cut));
            }
            for (int j = opt.j_lo; j <= opt.j_hi; ++j) {
                auto& row = rows[static_cast<std::size_t>(j - opt.j_lo)];
                const auto A = correlate_psi(buf, TA, j);
                std::vector<double> B;
                if (!TB.empty()) B = correlate_psi(buf, TB, j);
                const double scale = gnorm * std::sqrt(std::ldexp(1.0, j)) * std::sqrt(psi_l2_squared());
                for (const auto& q : lattice.cubes(j)) {
                    if (std::abs(q.center) > inner) continue;
                    const std::size_t idx = index_of(q.center);
                    const double coeff = A[idx];
                    const double ratio = std::abs(coeff) / orthogonality_bound(j, jp, q.center - a, T.epsilon());
                    row.max_ratio = std::max(row.max_ratio, ratio);
                    row.max_coeff = std::max(row.max_coeff, std::abs(coeff));
                    ++row.pairs;
                    if (!B.empty()) row.route_gap = std::max(row.route_gap, std::abs(coeff - B[idx]) / scale);
                }
            }
        }
        for (const auto& row : rows) {
            rep.c_emp = std::max(rep.c_emp, row.max_ratio);
            rep.max_route_gap = std::max(rep.max_route_gap, row.route_gap);
            rep.rows.push_back(row);
        }
    }
    std::sort(rep.rows.begin(), rep.rows.end(),
              [](const auto& x, const auto& y) { return std::tie(x.j, x.jp) < std::tie(y.j, y.jp); });
    rep.finite = std::isfinite(rep.c_emp);
    if (rep.max_route_gap > opt.route_tol)
        throw NumericalIntegrityError("orthogonality sweep routes disagree: relative gap " +
                                      std::to_string(rep.max_route_gap));
    return rep;
}

std::string to_string(PairingSide s) { return s == PairingSide::Right ? "T1" : "T*1"; }

namespace {

struct Extent {
    long first = 0;
    long last = -1;
};

Extent nonzero_extent(const SampledFunction& f) {
    Extent e;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0.0) continue;
        if (e.last < e.first) e.first = static_cast<long>(i);
        e.last = static_cast<long>(i);
    }
    return e;
}

double l1_norm(const SampledFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += std::abs(v);
    return s * f.grid().spacing();
}

} // namespace

PairingResult pairing_T1(const CzoKernel& T, const SampledFunction& eta, PairingSide side, double window) {
    const Grid& grid = eta.grid();
    const double h = grid.spacing();
    if (std::abs(eta.integral()) > 1e-8) throw PreconditionError("test function must have integral 0");
    PairingResult res;
    const Extent e = nonzero_extent(eta);
    if (e.last < e.first) return res;
    const double r = 0.5 * static_cast<double>(e.last - e.first) * h;
    const double reach = std::isfinite(T.support()) ? T.support() : 16.0 * (r + 1.0);
    const double W = window > 0.0 ? window : r + reach + h;
    res.window = W;
    const long wm = static_cast<long>(std::ceil(W / h));
    const auto x_at = [&](long i) { return -grid.half_width() + static_cast<double>(i) * h; };

    double total = 0.0;
    if (side == PairingSide::Right) {
        // int eta(x) T1(x) dx with T1(x) = sum over odd m, |m h| <= W, of K(x, x - m h) 2h.
        for (long i = e.first; i <= e.last; ++i) {
            const double ev = eta[static_cast<std::size_t>(i)];
            if (ev == 0.0) continue;
            const double x = x_at(i);
            double t1 = 0.0;
            for (long m = 1; m <= wm; m += 2) {
                t1 += T(x, x - static_cast<double>(m) * h);
                t1 += T(x, x + static_cast<double>(m) * h);
            }
            total += ev * t1 * 2.0 * h;
        }
    } else {
        // int (T eta)(x) dx over x within W of the support.
        for (long i = e.first - wm; i <= e.last + wm; ++i) {
            const double x = x_at(i);
            double acc = 0.0;
            for (long jdx = e.first; jdx <= e.last; ++jdx) {
                if ((i - jdx) % 2 == 0) continue;
                const double ev = eta[static_cast<std::size_t>(jdx)];
                if (ev == 0.0) continue;
                acc += T(x, x_at(jdx)) * ev;
            }
            total += acc * 2.0 * h;
        }
    }
    res.value = total * h;
    if (!(std::isfinite(T.support()) && W >= r + T.support())) {
        const double eps = T.epsilon();
        res.tail_bound = W > r ? 2.0 * T.size_constant() * l1_norm(eta) * std::pow(r, eps) /
                                     (eps * std::pow(W - r, eps))
                               : std::numeric_limits<double>::infinity();
    }
    return res;
}

std::vector<SampledFunction> pairing_battery(const Grid& grid) {
    std::vector<SampledFunction> out;
    const double R = grid.half_width();
    for (double scale : {1.0, 0.5, 0.25}) {
        for (double frac : {-0.25, -0.1, 0.0, 0.06, 0.15, 0.3}) {
            const double c = frac * R;
            const double r = scale * R / 8.0;
            if (std::abs(c) + r > 0.5 * R || r < 8.0 * grid.spacing()) continue;
            // Centered difference of the bump exp(-1 / (1 - t^2)); the sum telescopes to zero.
            const auto bump = SampledFunction::sample(grid, [c, r](double x) {
                const double t = (x - c) / r;
                return std::abs(t) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - t * t));
            });
            std::vector<double> d(grid.size(), 0.0);
            for (std::size_t i = 1; i + 1 < grid.size(); ++i)
                d[i] = (bump[i + 1] - bump[i - 1]) / (2.0 * grid.spacing());
            SampledFunction f(grid, std::move(d), grid.half_width());
            out.push_back(std::move(f));
        }
    }
    return out;
}

double pairing_battery_max(const CzoKernel& T, const Grid& grid, PairingSide side) {
    double worst = 0.0;
    for (const auto& eta : pairing_battery(grid))
        worst = std::max(worst, std::abs(pairing_T1(T, eta, side).value) / l1_norm(eta));
    return worst;
}

SampledFunction t1_function(const CzoKernel& T, const Grid& grid, double window) {
    const double h = grid.spacing();
    const double W = window > 0.0 ? window : (std::isfinite(T.support()) ? T.support() : 3.0 * grid.half_width());
    const long wm = static_cast<long>(std::ceil(W / h));
    std::vector<double> v(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.point(i);
        double acc = 0.0;
        for (long m = 1; m <= wm; m += 2) {
            acc += T(x, x - static_cast<double>(m) * h);
            acc += T(x, x + static_cast<double>(m) * h);
        }
        v[i] = acc * 2.0 * h;
    }
    return {grid, std::move(v), grid.half_width()};
}

CorrectedOperator::CorrectedOperator(CzoKernel T, const FilterBank& bank, const CubeLattice& lattice)
    : T_(std::move(T)),
      t1_(t1_function(T_, bank.grid())),
      pi_(BmoSymbol::make(t1_), ParaproductConfig(bank, lattice)),
      pi_one_(pi_.apply(domain_constant(bank.grid()))),
      pi_adj_one_(pi_.adjoint(domain_constant(bank.grid()))) {}

SampledFunction CorrectedOperator::apply(const SampledFunction& f) const {
    const auto tf = T_.has_apply() ? T_.apply(f) : apply_kernel(T_, f);
    return tf - pi_.apply(f);
}

double CorrectedOperator::pairing(const SampledFunction& eta, PairingSide side) const {
    const double base = pairing_T1(T_, eta, side).value;
    const auto& corr = side == PairingSide::Right ? pi_one_ : pi_adj_one_;
    return base - inner_product(eta, corr);
}

double CorrectedOperator::battery_max(PairingSide side) const {
    double worst = 0.0;
    for (const auto& eta : pairing_battery(t1_.grid()))
        worst = std::max(worst, std::abs(pairing(eta, side)) / l1_norm(eta));
    return worst;
}

CorrectedOperator correct_operator(const CzoKernel& T, const FilterBank& bank, const CubeLattice& lattice) {
    return CorrectedOperator(T, bank, lattice);
}

HarnessReport hardy_boundedness_harness(const CzoKernel& T, const ExponentFunction& p,
                                        std::span<const SampledFunction> corpus, const FilterBank& bank,
                                        const CubeLattice& lattice) {
    const double eps = T.epsilon();
    if (!(p.p_minus() > 1.0 / (1.0 + eps)) || p.p_plus() > 1.0)
        throw PreconditionError("exponent outside the window 1/(1+eps) < p- <= p+ <= 1");
    HarnessReport rep;
    rep.gate_value = pairing_battery_max(T, bank.grid(), PairingSide::Left);
    if (rep.gate_value > pairing_tolerance)
        throw GateRefusal("operator " + T.name() + " has T*1 != 0 (battery max " + std::to_string(rep.gate_value) +
                          ")");
    rep.finite = true;
    std::vector<double> finite;
    for (const auto& f : corpus) {
        const double hf = hardy_norm(f, p, bank, lattice, HardyMethod::SmoothMaximal);
        if (hf == 0.0) {
            rep.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const auto tf = T.has_apply() ? T.apply(f) : apply_kernel(T, f);
        const double ratio = hardy_norm(tf, p, bank, lattice, HardyMethod::SmoothMaximal) / hf;
        rep.ratios.push_back(ratio);
        if (std::isfinite(ratio)) finite.push_back(ratio);
        else rep.finite = false;
    }
    if (!finite.empty()) {
        rep.max_ratio = *std::max_element(finite.begin(), finite.end());
        std::sort(finite.begin(), finite.end());
        const std::size_t k = finite.size();
        rep.median_ratio = k % 2 ? finite[k / 2] : 0.5 * (finite[k / 2 - 1] + finite[k / 2]);
    }
    return rep;
}

bool refinement_stable(double a, double b, double factor) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return false;
    return std::max(a, b) / std::min(a, b) <= factor;
}

} // namespace vh
