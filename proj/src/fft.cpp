#include "vh/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace vh::fft {
namespace {

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

// One r2c/c2r plan pair per length, with owned aligned buffers.
class PlanPair {
public:
    explicit PlanPair(std::size_t n)
        : n_(n),
          real_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          cplx_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
        const int ni = static_cast<int>(n);
        fwd_ = fftw_plan_dft_r2c_1d(ni, real_.get(), cplx_.get(), FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(ni, cplx_.get(), real_.get(), FFTW_ESTIMATE);
    }
    ~PlanPair() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    PlanPair(const PlanPair&) = delete;
    PlanPair& operator=(const PlanPair&) = delete;

    Spectrum forward(std::span<const double> x) {
        std::copy(x.begin(), x.end(), real_.get());
        fftw_execute(fwd_);
        Spectrum out(n_ / 2 + 1);
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = {cplx_.get()[k][0], cplx_.get()[k][1]};
        return out;
    }

    std::vector<double> inverse(std::span<const std::complex<double>> X) {
        for (std::size_t k = 0; k < n_ / 2 + 1; ++k) {
            cplx_.get()[k][0] = X[k].real();
            cplx_.get()[k][1] = X[k].imag();
        }
        fftw_execute(inv_);
        std::vector<double> out(real_.get(), real_.get() + n_);
        const double s = 1.0 / static_cast<double>(n_);
        for (double& v : out) v *= s;
        return out;
    }

private:
    std::size_t n_;
    std::unique_ptr<double, FftwDeleter> real_;
    std::unique_ptr<fftw_complex, FftwDeleter> cplx_;
    fftw_plan fwd_{};
    fftw_plan inv_{};
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

PlanPair& plans(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<PlanPair>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<PlanPair>(n)).first;
    return *it->second;
}

} // namespace

Spectrum forward(std::span<const double> x) {
    std::lock_guard lock(plan_mutex());
    return plans(x.size()).forward(x);
}

std::vector<double> inverse(std::span<const std::complex<double>> X, std::size_t n) {
    std::lock_guard lock(plan_mutex());
    return plans(n).inverse(X);
}

std::vector<double> zero_pad(std::span<const double> x, std::size_t n) {
    std::vector<double> out(n, 0.0);
    std::copy(x.begin(), x.end(), out.begin());
    return out;
}

} // namespace vh::fft
