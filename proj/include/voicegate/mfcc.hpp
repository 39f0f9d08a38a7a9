#ifndef VOICEGATE_MFCC_HPP
#define VOICEGATE_MFCC_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "matrix.hpp"
#include "signal.hpp"
#include "util.hpp"

namespace voicegate {

struct MfccConfig {
    double preemphasis_k = 0.97;
    double frame_ms = 25.0;
    double hop_ms = 10.0;
    int num_filters = 20;
    int num_ceps = 13;
    int lifter = 22;
    double fmin_hz = 0.0;
    std::optional<double> fmax_hz;  ///< unset means the Nyquist frequency of the input

    double upper_edge_hz(int sample_rate_hz) const { return fmax_hz.value_or(sample_rate_hz / 2.0); }

    friend bool operator==(const MfccConfig&, const MfccConfig&) = default;
};

/// Canonical text form; feeds the fingerprint, so field order is fixed.
inline std::string canonical_text(const MfccConfig& c) {
    std::string s;
    s += "mfcc.preemphasis=" + format_double(c.preemphasis_k) + "\n";
    s += "mfcc.frame_ms=" + format_double(c.frame_ms) + "\n";
    s += "mfcc.hop_ms=" + format_double(c.hop_ms) + "\n";
    s += "mfcc.num_filters=" + std::to_string(c.num_filters) + "\n";
    s += "mfcc.num_ceps=" + std::to_string(c.num_ceps) + "\n";
    s += "mfcc.lifter=" + std::to_string(c.lifter) + "\n";
    s += "mfcc.fmin_hz=" + format_double(c.fmin_hz) + "\n";
    s += "mfcc.fmax_hz=" + (c.fmax_hz ? format_double(*c.fmax_hz) : std::string("nyquist")) + "\n";
    return s;
}

inline std::string fingerprint(const MfccConfig& c) { return to_hex(fnv1a64(canonical_text(c))); }

inline std::size_t samples_for_ms(double ms, int sample_rate_hz) {
    return static_cast<std::size_t>(std::lround(ms * sample_rate_hz / 1000.0));
}

/// Checks the rate-independent invariants; `sample_rate_hz` > 0 adds the
/// frequency-edge and frame-size checks.
inline void validate(const MfccConfig& c, int sample_rate_hz = 0) {
    if (!(c.preemphasis_k >= 0.0 && c.preemphasis_k < 1.0)) throw Error(ErrorKind::config, "pre-emphasis k must lie in [0, 1)");
    if (!(c.frame_ms > 0.0) || !(c.hop_ms > 0.0)) throw Error(ErrorKind::config, "frame and hop durations must be positive");
    if (c.hop_ms > c.frame_ms) throw Error(ErrorKind::config, "hop must not exceed frame duration");
    if (c.num_filters < 1) throw Error(ErrorKind::config, "need at least one filter");
    if (c.num_ceps < 1 || c.num_ceps > c.num_filters) throw Error(ErrorKind::config, "num_ceps must lie in [1, num_filters]");
    if (c.lifter < 0) throw Error(ErrorKind::config, "lifter must be non-negative");
    if (!(c.fmin_hz >= 0.0)) throw Error(ErrorKind::config, "fmin must be non-negative");
    if (c.fmax_hz && !(*c.fmax_hz > c.fmin_hz)) throw Error(ErrorKind::config, "fmin must be below fmax");
    if (sample_rate_hz > 0) {
        const double nyquist = sample_rate_hz / 2.0;
        const double fmax = c.upper_edge_hz(sample_rate_hz);
        if (fmax > nyquist) throw Error(ErrorKind::config, "fmax exceeds the Nyquist frequency");
        if (!(c.fmin_hz < fmax)) throw Error(ErrorKind::config, "fmin must be below fmax");
        if (samples_for_ms(c.frame_ms, sample_rate_hz) < 2) throw Error(ErrorKind::config, "frame shorter than two samples");
        if (samples_for_ms(c.hop_ms, sample_rate_hz) < 1) throw Error(ErrorKind::config, "hop shorter than one sample");
    }
}

// ---------------------------------------------------------------------------
// Stages, in pipeline order.

/// out[n] = in[n] - k in[n-1]; the first sample is scaled by (1 - k).
inline Signal preemphasize(const Signal& signal, double k) {
    if (!(k >= 0.0 && k < 1.0)) throw Error(ErrorKind::config, "pre-emphasis k must lie in [0, 1)");
    Signal out{std::vector<double>(signal.size()), signal.sample_rate_hz};
    if (signal.empty()) return out;
    out.samples[0] = (1.0 - k) * signal.samples[0];
    for (std::size_t n = 1; n < signal.size(); ++n) out.samples[n] = signal.samples[n] - k * signal.samples[n - 1];
    return out;
}

struct FrameMatrix {
    Matrix frames;  ///< num_frames x frame_len
    std::size_t frame_len = 0;
    std::size_t hop = 0;
};

inline std::size_t frame_count(std::size_t signal_len, std::size_t frame_len, std::size_t hop) {
    if (signal_len < frame_len) return 0;
    return (signal_len - frame_len) / hop + 1;
}

/// Frame i covers samples [i*hop, i*hop + frame_len); a partial tail is dropped.
inline FrameMatrix frame_blocks(const Signal& signal, double frame_ms, double hop_ms) {
    if (signal.sample_rate_hz <= 0) throw Error(ErrorKind::config, "sample rate must be positive");
    const std::size_t frame_len = samples_for_ms(frame_ms, signal.sample_rate_hz);
    const std::size_t hop = samples_for_ms(hop_ms, signal.sample_rate_hz);
    if (frame_len == 0 || hop == 0) throw Error(ErrorKind::config, "frame or hop rounds to zero samples");
    if (signal.size() < frame_len) {
        throw Error(ErrorKind::too_short, std::to_string(signal.size()) + " samples, one frame needs " +
                                              std::to_string(frame_len));
    }
    const std::size_t count = frame_count(signal.size(), frame_len, hop);
    FrameMatrix fm{Matrix(count, frame_len), frame_len, hop};
    for (std::size_t i = 0; i < count; ++i) {
        auto row = fm.frames.row(i);
        std::copy_n(signal.samples.begin() + static_cast<std::ptrdiff_t>(i * hop), frame_len, row.begin());
    }
    return fm;
}

inline std::vector<double> hamming_window(std::size_t frame_len) {
    if (frame_len < 2) throw Error(ErrorKind::config, "Hamming window needs at least two points");
    std::vector<double> w(frame_len);
    const double denom = static_cast<double>(frame_len - 1);
    for (std::size_t n = 0; n < frame_len; ++n) {
        w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
    }
    return w;
}

/// Hz to Mel, 2595 log10(1 + f/700).
inline double mel(double f_hz) {
    if (!(f_hz >= 0.0)) throw Error(ErrorKind::domain, "negative frequency");
    return 2595.0 * std::log10(1.0 + f_hz / 700.0);
}

inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

struct MelFilterbank {
    Matrix weights;  ///< num_filters x (fft_size/2 + 1), unit peak triangles
    std::vector<double> center_freqs_hz;
    std::vector<std::size_t> boundary_bins;  ///< num_filters + 2 FFT bin indices
    std::size_t fft_size = 0;
};

/// Triangular filters whose M+2 edges are uniform on the Mel axis between
/// fmin and fmax, snapped to the nearest FFT bin.
inline MelFilterbank build_filterbank(int num_filters, std::size_t fft_size, int sample_rate_hz, double fmin_hz,
                                      double fmax_hz) {
    if (num_filters < 1) throw Error(ErrorKind::config, "need at least one filter");
    if (sample_rate_hz <= 0 || fft_size < 2) throw Error(ErrorKind::config, "invalid sample rate or FFT size");
    if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= sample_rate_hz / 2.0)) {
        throw Error(ErrorKind::config, "filterbank edges must satisfy 0 <= fmin < fmax <= Nyquist");
    }
    const auto m = static_cast<std::size_t>(num_filters);
    const std::size_t bins = fft_size / 2 + 1;
    const double mel_lo = mel(fmin_hz);
    const double step = (mel(fmax_hz) - mel_lo) / static_cast<double>(m + 1);

    MelFilterbank fb{Matrix(m, bins), std::vector<double>(m), std::vector<std::size_t>(m + 2), fft_size};
    for (std::size_t i = 0; i < m + 2; ++i) {
        const double hz = mel_to_hz(mel_lo + step * static_cast<double>(i));
        const auto bin = static_cast<std::size_t>(std::lround(hz * static_cast<double>(fft_size) / sample_rate_hz));
        fb.boundary_bins[i] = std::min(bin, bins - 1);
        if (i >= 1 && i <= m) fb.center_freqs_hz[i - 1] = hz;
    }
    for (std::size_t i = 1; i < m + 2; ++i) {
        if (fb.boundary_bins[i] <= fb.boundary_bins[i - 1]) {
            throw Error(ErrorKind::resolution, std::to_string(num_filters) + " filters collide at FFT size " +
                                                   std::to_string(fft_size));
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double left = static_cast<double>(fb.boundary_bins[j]);
        const double center = static_cast<double>(fb.boundary_bins[j + 1]);
        const double right = static_cast<double>(fb.boundary_bins[j + 2]);
        for (std::size_t k = fb.boundary_bins[j]; k <= fb.boundary_bins[j + 2]; ++k) {
            const double x = static_cast<double>(k);
            fb.weights(j, k) = x <= center ? (x - left) / (center - left) : (right - x) / (right - center);
        }
    }
    return fb;
}

inline constexpr double kLogFloor = 1e-10;

/// m_j = ln(max(<filter_j, spectrum>, 1e-10)).
inline std::vector<double> log_fbe(std::span<const double> spectrum, const MelFilterbank& fb) {
    if (spectrum.size() != fb.weights.cols()) {
        throw Error(ErrorKind::shape, "spectrum has " + std::to_string(spectrum.size()) + " bins, filterbank expects " +
                                          std::to_string(fb.weights.cols()));
    }
    std::vector<double> out(fb.weights.rows());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const auto row = fb.weights.row(j);
        double energy = 0.0;
        // Rows are zero outside their support, so only the edge span contributes.
        for (std::size_t k = fb.boundary_bins[j]; k <= fb.boundary_bins[j + 2]; ++k) energy += row[k] * spectrum[k];
        out[j] = std::log(std::max(energy, kLogFloor));
    }
    return out;
}

/// C_i = sqrt(2/M) sum_{j=1..M} m_j cos(pi i (j - 0.5) / M), for i = 1..N.
inline std::vector<double> dct_cepstra(std::span<const double> log_energies, int num_ceps) {
    const std::size_t m = log_energies.size();
    if (num_ceps < 1 || static_cast<std::size_t>(num_ceps) > m) {
        throw Error(ErrorKind::config, "num_ceps must lie in [1, " + std::to_string(m) + "]");
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(m));
    std::vector<double> c(static_cast<std::size_t>(num_ceps));
    for (std::size_t i = 1; i <= c.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            acc += log_energies[j - 1] *
                   std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(m) * (static_cast<double>(j) - 0.5));
        }
        c[i - 1] = scale * acc;
    }
    return c;
}

inline double lifter_weight(std::size_t n, int lifter) {
    if (lifter <= 0) return 1.0;
    const double l = lifter;
    return 1.0 + 0.5 * l * std::sin(std::numbers::pi * static_cast<double>(n) / l);
}

/// Sinusoidal lifter; position n (0-based) is scaled by 1 + (L/2) sin(pi n / L).
inline std::vector<double> lifter(std::span<const double> cepstra, int lifter_param) {
    std::vector<double> out(cepstra.begin(), cepstra.end());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= lifter_weight(n, lifter_param);
    return out;
}

struct MfccMatrix {
    Matrix coeffs;  ///< num_frames x num_ceps
    std::string config_fingerprint;
};

/// Pre-emphasis, framing, Hamming window, FFT magnitude, Mel filterbank, log,
/// DCT and lifter, in that order.
inline MfccMatrix extract_mfcc(const Signal& signal, const MfccConfig& config) {
    validate(config, signal.sample_rate_hz);
    const Signal emphasized = preemphasize(signal, config.preemphasis_k);
    const FrameMatrix fm = frame_blocks(emphasized, config.frame_ms, config.hop_ms);
    const auto window = hamming_window(fm.frame_len);
    const std::size_t fft_size = next_power_of_two(fm.frame_len);
    const MelFilterbank fb = build_filterbank(config.num_filters, fft_size, signal.sample_rate_hz, config.fmin_hz,
                                              config.upper_edge_hz(signal.sample_rate_hz));

    MfccMatrix out{Matrix(fm.frames.rows(), static_cast<std::size_t>(config.num_ceps)), fingerprint(config)};
    std::vector<double> windowed(fm.frame_len);
    for (std::size_t f = 0; f < fm.frames.rows(); ++f) {
        const auto frame = fm.frames.row(f);
        for (std::size_t n = 0; n < fm.frame_len; ++n) windowed[n] = frame[n] * window[n];
        const auto spectrum = magnitude_spectrum(windowed);
        const auto energies = log_fbe(spectrum, fb);
        const auto cepstra = lifter(dct_cepstra(energies, config.num_ceps), config.lifter);
        std::copy(cepstra.begin(), cepstra.end(), out.coeffs.row(f).begin());
    }
    return out;
}

}  // namespace voicegate

#endif
