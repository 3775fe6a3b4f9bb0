#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vh::fft {

using Spectrum = std::vector<std::complex<double>>;

// Real-to-half-complex forward transform, unnormalized. Output length n/2+1.
Spectrum forward(std::span<const double> x);

// Inverse of forward(), normalized by 1/n.
std::vector<double> inverse(std::span<const std::complex<double>> X, std::size_t n);

// Frequency (cycles per unit length) of bin k for a length-n transform with spacing h.
inline double frequency(std::size_t k, std::size_t n, double h) {
    const double kk = k <= n / 2 ? static_cast<double>(k)
                                 : static_cast<double>(k) - static_cast<double>(n);
    return kk / (static_cast<double>(n) * h);
}

// Zero-pads x to length n (n >= x.size()).
std::vector<double> zero_pad(std::span<const double> x, std::size_t n);

} // namespace vh::fft
