#ifndef VOICEGATE_FFT_HPP
#define VOICEGATE_FFT_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"

namespace voicegate {

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 decimation-in-time FFT. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error(ErrorKind::shape, "FFT size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                // Twiddles are evaluated directly rather than by recurrence to
                // keep rounding error flat across large transforms.
                const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                             std::sin(angle * static_cast<double>(k)));
                const auto u = a[start + k];
                const auto v = a[start + k + half] * w;
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
    }
}

/// |DFT| bins 0..fft_size/2 of a real frame zero-padded to the next power of two.
inline std::vector<double> magnitude_spectrum(std::span<const double> frame) {
    if (frame.empty()) throw Error(ErrorKind::shape, "empty frame");
    const std::size_t fft_size = next_power_of_two(frame.size());
    std::vector<std::complex<double>> buf(fft_size);
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
    fft_inplace(buf);
    std::vector<double> mags(fft_size / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(buf[k]);
    return mags;
}

}  // namespace voicegate

#endif
