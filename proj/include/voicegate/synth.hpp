#ifndef VOICEGATE_SYNTH_HPP
#define VOICEGATE_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "signal.hpp"
#include "wav.hpp"

namespace voicegate {

/// Harmonic source shaped by three resonances; a crude stand-in for a
/// speaker's pitch and vocal-tract envelope.
struct VoiceProfile {
    double f0_hz = 120.0;
    std::array<double, 3> formants_hz{500.0, 1500.0, 2500.0};
    std::array<double, 3> bandwidths_hz{80.0, 120.0, 160.0};
};

struct SynthOptions {
    int speakers = 5;
    int train_per_speaker = 40;
    int test_per_speaker = 10;
    std::uint64_t seed = 1;
    int sample_rate_hz = 16000;
    double duration_s = 1.0;
    double snr_db = 20.0;
    /// Each clip is voiced by a random profile regardless of its directory,
    /// so labels carry no information (chance-level control corpus).
    bool shuffle_voices = false;
};

namespace synth_detail {

inline std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix(mix(mix(seed) ^ a) ^ b) ^ c);
}

inline std::string speaker_name(int s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "spk%02d", s + 1);
    return buf;
}

}  // namespace synth_detail

/// Speaker s of `count`: pitch spread over 95..245 Hz, formants drawn from
/// the seed.
inline VoiceProfile make_voice_profile(int s, int count, std::uint64_t seed) {
    Rng rng(synth_detail::derive_seed(seed, 0x5eed, static_cast<std::uint64_t>(s), 0));
    VoiceProfile v;
    const double spread = count > 1 ? static_cast<double>(s) / (count - 1) : 0.5;
    v.f0_hz = 95.0 + 150.0 * spread + rng.uniform(-5.0, 5.0);
    v.formants_hz = {rng.uniform(300.0, 900.0), rng.uniform(1000.0, 2300.0), rng.uniform(2500.0, 3500.0)};
    v.bandwidths_hz = {rng.uniform(60.0, 120.0), rng.uniform(90.0, 160.0), rng.uniform(120.0, 220.0)};
    return v;
}

/// One clip: jittered pitch with slow vibrato, resonance-weighted harmonics,
/// syllable-like amplitude envelope, white noise at `snr_db`, peak 0.8.
inline Signal synthesize_clip(const VoiceProfile& voice, const SynthOptions& opt, std::uint64_t clip_seed) {
    Rng rng(clip_seed);
    const auto n = static_cast<std::size_t>(std::lround(opt.duration_s * opt.sample_rate_hz));
    if (n == 0) throw Error(ErrorKind::config, "clip duration rounds to zero samples");
    const double fs = opt.sample_rate_hz;
    const double nyquist = fs / 2.0;
    const double f0 = voice.f0_hz * (1.0 + rng.uniform(-0.03, 0.03));
    const double vibrato_hz = rng.uniform(3.0, 6.0);
    const double vibrato_depth = rng.uniform(0.005, 0.02);
    const double syllable_hz = rng.uniform(2.0, 5.0);
    const double syllable_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    const auto harmonics = static_cast<int>(std::min(4000.0, nyquist * 0.9) / f0);
    std::vector<double> amplitude(static_cast<std::size_t>(harmonics));
    std::vector<double> phase(static_cast<std::size_t>(harmonics));
    for (int h = 1; h <= harmonics; ++h) {
        const double f = h * f0;
        double a = 0.0;
        for (std::size_t r = 0; r < voice.formants_hz.size(); ++r) {
            const double d = (f - voice.formants_hz[r]) / voice.bandwidths_hz[r];
            a += 1.0 / (1.0 + d * d);
        }
        amplitude[static_cast<std::size_t>(h - 1)] = a / std::sqrt(static_cast<double>(h)) * rng.uniform(0.85, 1.15);
        phase[static_cast<std::size_t>(h - 1)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }

    Signal out{std::vector<double>(n), opt.sample_rate_hz};
    double theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double inst_f0 = f0 * (1.0 + vibrato_depth * std::sin(2.0 * std::numbers::pi * vibrato_hz * t));
        theta += 2.0 * std::numbers::pi * inst_f0 / fs;
        double v = 0.0;
        for (std::size_t h = 0; h < amplitude.size(); ++h) v += amplitude[h] * std::sin(static_cast<double>(h + 1) * theta + phase[h]);
        const double envelope = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * syllable_hz * t + syllable_phase);
        out.samples[i] = v * envelope;
    }

    double power = 0.0;
    for (double s : out.samples) power += s * s;
    power /= static_cast<double>(n);
    const double noise_sigma = std::sqrt(power / std::pow(10.0, opt.snr_db / 10.0));
    for (double& s : out.samples) s += noise_sigma * rng.gaussian();

    double peak = 0.0;
    for (double s : out.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.0) {
        for (double& s : out.samples) s *= 0.8 / peak;
    }
    return out;
}

struct SynthSummary {
    int files_written = 0;
    std::vector<std::string> speakers;
};

/// Writes `<out>/train/<spk>/<spk>_train_NNN.wav` and the matching test tree.
inline SynthSummary write_synthetic_corpus(const std::filesystem::path& out_dir, const SynthOptions& opt) {
    namespace fs = std::filesystem;
    if (opt.speakers < 1 || opt.train_per_speaker < 0 || opt.test_per_speaker < 0) {
        throw Error(ErrorKind::config, "speaker and clip counts must be non-negative (at least one speaker)");
    }
    if (opt.sample_rate_hz <= 0 || !(opt.duration_s > 0.0)) throw Error(ErrorKind::config, "invalid rate or duration");

    std::vector<VoiceProfile> voices;
    for (int s = 0; s < opt.speakers; ++s) voices.push_back(make_voice_profile(s, opt.speakers, opt.seed));

    SynthSummary summary;
    const std::array<std::pair<const char*, int>, 2> splits = {{{"train", opt.train_per_speaker}, {"test", opt.test_per_speaker}}};
    for (std::uint64_t split = 0; split < splits.size(); ++split) {
        const auto& [split_name, count] = splits[split];
        for (int s = 0; s < opt.speakers; ++s) {
            const std::string name = synth_detail::speaker_name(s);
            const fs::path dir = out_dir / split_name / name;
            fs::create_directories(dir);
            for (int c = 0; c < count; ++c) {
                const std::uint64_t clip_seed =
                    synth_detail::derive_seed(opt.seed, split + 1, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(c));
                int voice = s;
                if (opt.shuffle_voices) voice = static_cast<int>(Rng(clip_seed ^ 0xc0ffee).below(static_cast<std::uint64_t>(opt.speakers)));
                char file[64];
                std::snprintf(file, sizeof file, "%s_%s_%03d.wav", name.c_str(), split_name, c);
                write_wav_pcm16(dir / file, synthesize_clip(voices[static_cast<std::size_t>(voice)], opt, clip_seed));
                ++summary.files_written;
            }
        }
    }
    for (int s = 0; s < opt.speakers; ++s) summary.speakers.push_back(synth_detail::speaker_name(s));
    return summary;
}

}  // namespace voicegate

#endif
