#include "vh/maximal.hpp"

#include "vh/errors.hpp"
#include "vh/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace vh {

MaximalConfig MaximalConfig::ladder(const Grid& grid, double max_radius) {
    MaximalConfig cfg;
    cfg.max_radius = max_radius;
    for (std::size_t w = 1; w <= grid.size(); w *= 2) {
        if (static_cast<double>(w) * grid.spacing() > 2.0 * max_radius && w > 1) break;
        cfg.window_lengths.push_back(w);
    }
    return cfg;
}

std::vector<double> MaximalConfig::radii(const Grid& grid) const {
    std::vector<double> r;
    for (std::size_t w : window_lengths) r.push_back(0.5 * static_cast<double>(w) * grid.spacing());
    return r;
}

std::vector<double> hl_maximal(std::span<const double> values, const MaximalConfig& cfg) {
    const std::size_t M = values.size();
    std::vector<long double> prefix(M + 1, 0.0L);
    for (std::size_t i = 0; i < M; ++i) prefix[i + 1] = prefix[i] + std::abs(values[i]);

    std::vector<double> out(M, 0.0);
    std::vector<double> avg;
    for (std::size_t w : cfg.window_lengths) {
        if (w > M) break;
        if (w == 1) {
            for (std::size_t i = 0; i < M; ++i) out[i] = std::max(out[i], std::abs(values[i]));
            continue;
        }
        const std::size_t starts = M - w + 1;
        avg.assign(starts, 0.0);
        for (std::size_t s = 0; s < starts; ++s)
            avg[s] = static_cast<double>((prefix[s + w] - prefix[s]) / static_cast<long double>(w));
        // Sliding maximum of avg over start positions s in [i-w+1, i].
        std::deque<std::size_t> dq;
        std::size_t next = 0;
        for (std::size_t i = 0; i < M; ++i) {
            const std::size_t hi = std::min(i, starts - 1);
            while (next <= hi) {
                while (!dq.empty() && avg[dq.back()] <= avg[next]) dq.pop_back();
                dq.push_back(next++);
            }
            const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
            while (dq.front() < lo) dq.pop_front();
            out[i] = std::max(out[i], avg[dq.front()]);
        }
    }
    return out;
}

SampledFunction hl_maximal(const SampledFunction& f, const MaximalConfig& cfg) {
    return {f.grid(), hl_maximal(f.values(), cfg), f.grid().half_width()};
}

SampledFunction smooth_maximal(const SampledFunction& f, const SampledFunction& phi, int k_min,
                               int k_max) {
    if (std::abs(phi.integral() - 1.0) > 1e-8)
        throw PreconditionError("smoothing filter must integrate to 1");
    std::vector<double> out(f.size(), 0.0);
    for (int k = k_min; k <= k_max; ++k) {
        const auto c = convolve_scaled(f, phi, k);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::abs(c[i]));
    }
    return {f.grid(), std::move(out), f.grid().half_width()};
}

SampledFunction smooth_maximal(const SampledFunction& f, const FilterBank& bank) {
    const auto fields = bank.convolve_all(f.values(), FilterKind::Phi);
    std::vector<double> out(f.size(), 0.0);
    for (const auto& c : fields)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::abs(c[i]));
    return {f.grid(), std::move(out), f.grid().half_width()};
}

VectorMaximalReport fs_vector_check(std::span<const SampledFunction> family, double q,
                                    const ExponentFunction& p, const MaximalConfig& cfg) {
    if (!(q > 1.0)) throw DomainError("vector-valued maximal check needs q > 1");
    if (family.empty()) throw DomainError("vector-valued maximal check needs a nonempty family");
    const Grid& grid = family.front().grid();
    std::vector<double> lhs(grid.size(), 0.0);
    std::vector<double> rhs(grid.size(), 0.0);
    for (const auto& f : family) {
        const auto mf = hl_maximal(f.values(), cfg);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            lhs[i] += std::pow(mf[i], q);
            rhs[i] += std::pow(std::abs(f[i]), q);
        }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        lhs[i] = std::pow(lhs[i], 1.0 / q);
        rhs[i] = std::pow(rhs[i], 1.0 / q);
    }
    VectorMaximalReport r;
    r.lhs = luxemburg_norm(lhs, grid.spacing(), p.samples());
    r.rhs = luxemburg_norm(rhs, grid.spacing(), p.samples());
    if (r.rhs == 0.0) {
        r.vacuous = true;
        r.ratio = 0.0;
    } else {
        r.ratio = r.lhs / r.rhs;
    }
    return r;
}

double pointwise_ratio_sup(const SampledFunction& a, const SampledFunction& b, double floor) {
    const double cut = floor * b.sup_norm();
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (b[i] > cut && b[i] > 0.0) r = std::max(r, std::abs(a[i]) / b[i]);
    return r;
}

} // namespace vh
