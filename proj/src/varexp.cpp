#include "vh/varexp.hpp"

#include "vh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vh {

std::string to_string(ExponentClass c) {
    switch (c) {
    case ExponentClass::P0: return "P0";
    case ExponentClass::P: return "P";
    case ExponentClass::HardyRange: return "HardyRange";
    }
    return "?";
}

ExponentFunction ExponentFunction::make(const Grid& grid, std::function<double(double)> evaluator,
                                        ExponentClass declared, std::string description) {
    ExponentFunction p(grid);
    p.eval_ = std::move(evaluator);
    p.class_ = declared;
    p.description_ = std::move(description);
    p.samples_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) p.samples_[i] = p.eval_(grid.point(i));
    const auto [lo, hi] = std::minmax_element(p.samples_.begin(), p.samples_.end());
    p.p_minus_ = *lo;
    p.p_plus_ = *hi;
    if (!(p.p_minus_ > 0.0) || !std::isfinite(p.p_plus_))
        throw ConfigError("exponent must satisfy 0 < p- <= p+ < inf");
    if (declared == ExponentClass::P && !(p.p_minus_ > 1.0))
        throw ConfigError("exponent declared in class P but p- <= 1");
    if (declared == ExponentClass::HardyRange && p.p_plus_ > 1.0)
        throw ConfigError("exponent declared in Hardy range but p+ > 1");
    p.lh_ = check_log_holder(p, grid);
    return p;
}

ExponentFunction ExponentFunction::on(const Grid& grid) const {
    return make(grid, eval_, class_, description_);
}

namespace {
ExponentClass natural_class(double lo, double hi) {
    if (hi <= 1.0) return ExponentClass::HardyRange;
    if (lo > 1.0) return ExponentClass::P;
    return ExponentClass::P0;
}
} // namespace

ExponentFunction ExponentFunction::constant(const Grid& grid, double p) {
    return make(grid, [p](double) { return p; }, natural_class(p, p),
                "constant(" + std::to_string(p) + ")");
}

ExponentFunction ExponentFunction::piecewise(const Grid& grid, std::vector<double> breaks,
                                             std::vector<double> values) {
    if (values.empty() || breaks.size() + 1 != values.size())
        throw ConfigError("piecewise exponent needs values.size() == breaks.size() + 1");
    if (!std::is_sorted(breaks.begin(), breaks.end()))
        throw ConfigError("piecewise exponent breaks must be sorted");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const ExponentClass cls = natural_class(*lo, *hi);
    return make(
        grid,
        [breaks, values](double x) {
            const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
            return values[static_cast<std::size_t>(it - breaks.begin())];
        },
        cls, "piecewise");
}

ExponentFunction ExponentFunction::smoothstep(const Grid& grid, double p_left, double p_right,
                                              double x0, double x1) {
    if (!(x1 > x0)) throw ConfigError("smoothstep exponent needs x1 > x0");
    const ExponentClass cls = natural_class(std::min(p_left, p_right), std::max(p_left, p_right));
    return make(
        grid,
        [=](double x) {
            const double u = std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
            return p_left + (p_right - p_left) * u * u * (3.0 - 2.0 * u);
        },
        cls, "smoothstep");
}

double modular(std::span<const double> values, double h, std::span<const double> p, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("modular needs lambda > 0");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::abs(values[i]);
        if (v == 0.0) continue;
        s += std::pow(v / lambda, p[i]);
    }
    return s * h;
}

double modular(const SampledFunction& f, const ExponentFunction& p, double lambda) {
    if (!(f.grid() == p.grid())) throw ConfigError("exponent and function on different grids");
    return modular(f.values(), f.grid().spacing(), p.samples(), lambda);
}

double luxemburg_norm(std::span<const double> values, double h, std::span<const double> p) {
    double peak = 0.0;
    std::size_t support = 0;
    for (double v : values) {
        peak = std::max(peak, std::abs(v));
        if (v != 0.0) ++support;
    }
    if (peak == 0.0) return 0.0;

    // Work with |f| / max|f| so that c*f with c a power of two bisects identically.
    std::vector<double> g(values.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::abs(values[i]) / peak;
    const double p_minus = *std::min_element(p.begin(), p.end());

    double lo = std::numeric_limits<double>::min() * 1e100;
    double hi = std::pow(static_cast<double>(support) * h, 1.0 / p_minus) + 1.0;
    while (modular(g, h, p, hi) > 1.0) hi *= 2.0;
    while (modular(g, h, p, lo) <= 1.0) lo *= 0.5;

    while (hi - lo > 1e-13 * hi) {
        const double mid = hi / lo > 4.0 ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (modular(g, h, p, mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return peak * 0.5 * (lo + hi);
}

double luxemburg_norm(const SampledFunction& f, const ExponentFunction& p) {
    if (!(f.grid() == p.grid())) throw ConfigError("exponent and function on different grids");
    return luxemburg_norm(f.values(), f.grid().spacing(), p.samples());
}

double indicator_norm(const ExponentFunction& p, std::size_t first, std::size_t count) {
    if (count == 0) return 0.0;
    const std::vector<double> ones(count, 1.0);
    return luxemburg_norm(ones, p.grid().spacing(), p.samples().subspan(first, count));
}

LogHolderReport check_log_holder(const ExponentFunction& p, const Grid& grid, double threshold) {
    const std::size_t M = grid.size();
    const double h = grid.spacing();
    std::vector<double> s(M);
    for (std::size_t i = 0; i < M; ++i) s[i] = p(grid.point(i));

    LogHolderReport r;
    r.threshold = threshold;

    const auto reach = static_cast<std::size_t>(std::floor(0.5 / h + 1e-12));
    for (std::size_t d = 1; d <= reach && d < M; ++d) {
        const double w = -std::log(static_cast<double>(d) * h);
        for (std::size_t i = 0; i + d < M; ++i)
            r.local_constant = std::max(r.local_constant, std::abs(s[i] - s[i + d]) * w);
    }

    // Pairs with |y| >= |x|: sweep |x| downward keeping the running range of p.
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(grid.point(a)) > std::abs(grid.point(b));
    });
    double run_max = -std::numeric_limits<double>::infinity();
    double run_min = std::numeric_limits<double>::infinity();
    for (std::size_t g0 = 0; g0 < M;) {
        std::size_t g1 = g0;
        const double ax = std::abs(grid.point(order[g0]));
        while (g1 < M && std::abs(grid.point(order[g1])) == ax) {
            run_max = std::max(run_max, s[order[g1]]);
            run_min = std::min(run_min, s[order[g1]]);
            ++g1;
        }
        const double w = std::log(std::exp(1.0) + ax);
        for (std::size_t k = g0; k < g1; ++k) {
            const double v = s[order[k]];
            r.decay_constant = std::max(r.decay_constant, std::max(run_max - v, v - run_min) * w);
        }
        g0 = g1;
    }
    r.pass = r.local_constant <= threshold && r.decay_constant <= threshold;
    return r;
}

} // namespace vh
