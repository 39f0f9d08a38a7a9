#ifndef VOICEGATE_ERROR_HPP
#define VOICEGATE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace voicegate {

enum class ErrorKind {
    format,
    unsupported_format,
    empty_audio,
    empty_corpus,
    io,
    depth,
    structure,
    config,
    too_short,
    domain,
    resolution,
    shape,
    empty_feature,
    insufficient_data,
    leakage,
    unknown_speaker,
    fingerprint_mismatch,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::format: return "format error";
        case ErrorKind::unsupported_format: return "unsupported format";
        case ErrorKind::empty_audio: return "empty audio";
        case ErrorKind::empty_corpus: return "empty corpus";
        case ErrorKind::io: return "i/o error";
        case ErrorKind::depth: return "depth error";
        case ErrorKind::structure: return "structure error";
        case ErrorKind::config: return "config error";
        case ErrorKind::too_short: return "signal too short";
        case ErrorKind::domain: return "domain error";
        case ErrorKind::resolution: return "resolution error";
        case ErrorKind::shape: return "shape error";
        case ErrorKind::empty_feature: return "empty feature";
        case ErrorKind::insufficient_data: return "insufficient data";
        case ErrorKind::leakage: return "train/test leakage";
        case ErrorKind::unknown_speaker: return "unknown speaker";
        case ErrorKind::fingerprint_mismatch: return "config fingerprint mismatch";
    }
    return "error";
}

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace voicegate

#endif
