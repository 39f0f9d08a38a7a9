#ifndef VOICEGATE_PIPELINE_HPP
#define VOICEGATE_PIPELINE_HPP

#include <string>

#include "clip_features.hpp"
#include "mfcc.hpp"
#include "util.hpp"
#include "wavelet.hpp"

namespace voicegate {

/// Everything that determines a clip's feature vector.
struct FeatureConfig {
    bool denoise_enabled = true;
    WaveletConfig wavelet;
    MfccConfig mfcc;

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

inline const char* to_string(WaveletFamily f) { return f == WaveletFamily::haar ? "haar" : "db4"; }

inline std::string canonical_text(const FeatureConfig& c) {
    std::string s;
    s += std::string("wavelet.enabled=") + (c.denoise_enabled ? "true" : "false") + "\n";
    s += std::string("wavelet.family=") + to_string(c.wavelet.family) + "\n";
    s += "wavelet.levels=" + std::to_string(c.wavelet.levels) + "\n";
    s += "wavelet.threshold_rule=universal\n";
    s += "wavelet.threshold_mode=soft\n";
    return s + canonical_text(c.mfcc);
}

inline std::string fingerprint(const FeatureConfig& c) { return to_hex(fnv1a64(canonical_text(c))); }

/// denoise -> MFCC -> pooling for one clip.
inline ClipFeature extract_clip_feature(const Signal& signal, const FeatureConfig& config, std::string clip_id = {}) {
    if (signal.empty()) throw Error(ErrorKind::empty_audio, "clip has no samples");
    const Signal cleaned = config.denoise_enabled ? denoise(signal, config.wavelet) : signal;
    return pool(extract_mfcc(cleaned, config.mfcc), std::move(clip_id));
}

}  // namespace voicegate

#endif
