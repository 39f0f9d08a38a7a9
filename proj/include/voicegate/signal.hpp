#ifndef VOICEGATE_SIGNAL_HPP
#define VOICEGATE_SIGNAL_HPP

#include <string>
#include <vector>

namespace voicegate {

/// Mono audio at a fixed rate. Decoded integer audio is scaled into [-1, 1].
struct Signal {
    std::vector<double> samples;
    int sample_rate_hz = 0;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

struct LabeledClip {
    Signal signal;
    std::string speaker_id;
    std::string source_path;
};

}  // namespace voicegate

#endif
