#ifndef VOICEGATE_WAVELET_HPP
#define VOICEGATE_WAVELET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"
#include "signal.hpp"

namespace voicegate {

enum class WaveletFamily { haar, daubechies4 };
enum class ThresholdRule { universal };
enum class ThresholdMode { soft };

struct WaveletConfig {
    WaveletFamily family = WaveletFamily::daubechies4;
    int levels = 4;
    ThresholdRule threshold_rule = ThresholdRule::universal;
    ThresholdMode threshold_mode = ThresholdMode::soft;

    friend bool operator==(const WaveletConfig&, const WaveletConfig&) = default;
};

/// Multi-level pyramid. `details[0]` is the finest level. `level_lengths[l]`
/// is the unpadded input length seen by level l, so the inverse can trim.
struct WaveletDecomposition {
    std::vector<double> approximation;
    std::vector<std::vector<double>> details;
    std::vector<std::size_t> level_lengths;
    int sample_rate_hz = 0;

    std::size_t coefficient_count() const {
        std::size_t n = approximation.size();
        for (const auto& d : details) n += d.size();
        return n;
    }
};

namespace wavelet_detail {

// Orthonormal scaling filters h[0..L-1], in the order used by
// a[n] = sum_k h[k] x[2n + k].
inline constexpr std::array<double, 2> kHaar = {0.70710678118654752440, 0.70710678118654752440};
inline constexpr std::array<double, 8> kDb4 = {
    0.2303778133088965,   0.7148465705529157,   0.6308807679298589,  -0.027983769416859854,
    -0.18703481171909309, 0.030841381835560764, 0.0328830116668852,  -0.010597401785069032,
};

inline std::span<const double> lowpass(WaveletFamily family) {
    switch (family) {
        case WaveletFamily::haar: return kHaar;
        case WaveletFamily::daubechies4: return kDb4;
    }
    return kHaar;
}

// Quadrature mirror: g[k] = (-1)^k h[L-1-k].
inline std::vector<double> highpass(std::span<const double> h) {
    std::vector<double> g(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double v = h[h.size() - 1 - k];
        g[k] = (k % 2 == 0) ? v : -v;
    }
    return g;
}

// Half-sample symmetric extension to even length: x[N] = x[N-1].
inline std::vector<double> pad_even(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    if (out.size() % 2 == 1) out.push_back(out.back());
    return out;
}

inline void analyze(std::span<const double> x, std::span<const double> h, std::span<const double> g,
                    std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k) {
            const double v = x[(2 * i + k) % n];
            a += h[k] * v;
            d += g[k] * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

// Adjoint of analyze(); the periodized filter bank is orthogonal so this is
// also its inverse.
inline std::vector<double> synthesize(std::span<const double> approx, std::span<const double> detail,
                                      std::span<const double> h, std::span<const double> g) {
    const std::size_t half = approx.size();
    const std::size_t n = 2 * half;
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        for (std::size_t k = 0; k < h.size(); ++k) {
            x[(2 * i + k) % n] += h[k] * approx[i] + g[k] * detail[i];
        }
    }
    return x;
}

inline int max_levels(std::size_t length) {
    int levels = 0;
    while ((std::size_t{1} << (levels + 1)) <= length) ++levels;
    return levels;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace wavelet_detail

inline void validate_depth(std::size_t length, const WaveletConfig& config) {
    if (config.levels < 1) throw Error(ErrorKind::depth, "levels must be at least 1");
    if (config.levels > wavelet_detail::max_levels(length)) {
        throw Error(ErrorKind::depth, std::to_string(length) + " samples cannot support " +
                                          std::to_string(config.levels) + " levels");
    }
}

/// Mallat cascade with periodized orthonormal filters. Each level's input is
/// first extended to even length by repeating its last sample.
inline WaveletDecomposition dwt_forward(const Signal& signal, const WaveletConfig& config) {
    using namespace wavelet_detail;
    validate_depth(signal.size(), config);
    const auto h = lowpass(config.family);
    const auto g = highpass(h);

    WaveletDecomposition out;
    out.sample_rate_hz = signal.sample_rate_hz;
    std::vector<double> current = signal.samples;
    for (int level = 0; level < config.levels; ++level) {
        out.level_lengths.push_back(current.size());
        const auto padded = pad_even(current);
        std::vector<double> approx;
        std::vector<double> detail;
        analyze(padded, h, g, approx, detail);
        out.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    out.approximation = std::move(current);
    return out;
}

inline Signal dwt_inverse(const WaveletDecomposition& decomp, const WaveletConfig& config) {
    using namespace wavelet_detail;
    const auto levels = static_cast<std::size_t>(config.levels);
    if (config.levels < 1 || decomp.details.size() != levels || decomp.level_lengths.size() != levels) {
        throw Error(ErrorKind::structure, "decomposition has " + std::to_string(decomp.details.size()) +
                                              " levels, config expects " + std::to_string(config.levels));
    }
    const auto h = lowpass(config.family);
    const auto g = highpass(h);

    std::vector<double> current = decomp.approximation;
    for (std::size_t l = levels; l-- > 0;) {
        const auto& detail = decomp.details[l];
        const std::size_t length = decomp.level_lengths[l];
        if (detail.size() != current.size() || (length + 1) / 2 != current.size()) {
            throw Error(ErrorKind::structure, "coefficient count mismatch at level " + std::to_string(l + 1));
        }
        current = synthesize(current, detail, h, g);
        current.resize(length);
    }
    return Signal{std::move(current), decomp.sample_rate_hz};
}

inline double soft_threshold(double value, double threshold) {
    const double magnitude = std::abs(value) - threshold;
    if (magnitude <= 0.0) return 0.0;
    return std::copysign(magnitude, value);
}

/// Noise level from the finest detail band: median absolute deviation / 0.6745.
inline double estimate_noise_sigma(const WaveletDecomposition& decomp) {
    if (decomp.details.empty()) return 0.0;
    std::vector<double> magnitudes;
    magnitudes.reserve(decomp.details.front().size());
    for (double d : decomp.details.front()) magnitudes.push_back(std::abs(d));
    return wavelet_detail::median(std::move(magnitudes)) / 0.6745;
}

inline double universal_threshold(double sigma, std::size_t length) {
    if (length < 2) return 0.0;
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(length)));
}

/// VisuShrink: soft-threshold every detail band at sigma * sqrt(2 ln N).
inline Signal denoise(const Signal& signal, const WaveletConfig& config) {
    auto decomp = dwt_forward(signal, config);
    const double threshold = universal_threshold(estimate_noise_sigma(decomp), signal.size());
    for (auto& band : decomp.details) {
        for (double& d : band) d = soft_threshold(d, threshold);
    }
    return dwt_inverse(decomp, config);
}

}  // namespace voicegate

#endif
