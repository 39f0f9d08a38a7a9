#ifndef VOICEGATE_CONFIG_HPP
#define VOICEGATE_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "pipeline.hpp"
#include "util.hpp"

namespace voicegate {

/// Full set of tunables read from a `key = value` config file.
struct PipelineConfig {
    FeatureConfig features;
    int k = 3;
    int folds = 5;
    std::uint64_t seed = 1;
    std::vector<int> k_values = {2, 3, 4, 5, 6};

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] inline void bad_value(std::string_view key, std::string_view value, int line) {
    throw Error(ErrorKind::config, "line " + std::to_string(line) + ": invalid value '" + std::string(value) + "' for " +
                                       std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, int line) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto result = std::from_chars(value.data(), end, out);
    if (result.ec != std::errc{} || result.ptr != end) bad_value(key, value, line);
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view value, int line) {
    if (value == "true") return true;
    if (value == "false") return false;
    bad_value(key, value, line);
}

inline std::vector<int> parse_int_list(std::string_view key, std::string_view value, int line) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        out.push_back(parse_number<int>(key, item, line));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace config_detail

inline std::vector<int> parse_k_list(std::string_view text) { return config_detail::parse_int_list("k list", text, 0); }

inline void validate(const PipelineConfig& c) {
    validate(c.features.mfcc);
    if (c.features.wavelet.levels < 1) throw Error(ErrorKind::config, "wavelet.levels must be at least 1");
    if (c.k < 1) throw Error(ErrorKind::config, "knn.k must be at least 1");
    if (c.folds < 2) throw Error(ErrorKind::config, "eval.folds must be at least 2");
    if (c.k_values.empty()) throw Error(ErrorKind::config, "eval.k_values is empty");
    for (int k : c.k_values) {
        if (k < 1) throw Error(ErrorKind::config, "eval.k_values entries must be at least 1");
    }
}

/// Parses `key = value` lines; `#` starts a comment. Unknown or repeated keys
/// are errors. Missing keys keep their defaults.
inline PipelineConfig parse_config(std::string_view text) {
    using namespace config_detail;
    PipelineConfig c;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!seen.insert(std::string(key)).second) {
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": duplicate key " + std::string(key));
        }

        auto& f = c.features;
        if (key == "wavelet.enabled") {
            f.denoise_enabled = parse_bool(key, value, line_no);
        } else if (key == "wavelet.family") {
            if (value == "haar") {
                f.wavelet.family = WaveletFamily::haar;
            } else if (value == "db4") {
                f.wavelet.family = WaveletFamily::daubechies4;
            } else {
                bad_value(key, value, line_no);
            }
        } else if (key == "wavelet.levels") {
            f.wavelet.levels = parse_number<int>(key, value, line_no);
        } else if (key == "wavelet.threshold_rule") {
            if (value != "universal") bad_value(key, value, line_no);
        } else if (key == "wavelet.threshold_mode") {
            if (value != "soft") bad_value(key, value, line_no);
        } else if (key == "mfcc.preemphasis") {
            f.mfcc.preemphasis_k = parse_number<double>(key, value, line_no);
        } else if (key == "mfcc.frame_ms") {
            f.mfcc.frame_ms = parse_number<double>(key, value, line_no);
        } else if (key == "mfcc.hop_ms") {
            f.mfcc.hop_ms = parse_number<double>(key, value, line_no);
        } else if (key == "mfcc.num_filters") {
            f.mfcc.num_filters = parse_number<int>(key, value, line_no);
        } else if (key == "mfcc.num_ceps") {
            f.mfcc.num_ceps = parse_number<int>(key, value, line_no);
        } else if (key == "mfcc.lifter") {
            f.mfcc.lifter = parse_number<int>(key, value, line_no);
        } else if (key == "mfcc.fmin_hz") {
            f.mfcc.fmin_hz = parse_number<double>(key, value, line_no);
        } else if (key == "mfcc.fmax_hz") {
            if (value == "nyquist") {
                f.mfcc.fmax_hz.reset();
            } else {
                f.mfcc.fmax_hz = parse_number<double>(key, value, line_no);
            }
        } else if (key == "knn.k") {
            c.k = parse_number<int>(key, value, line_no);
        } else if (key == "eval.folds") {
            c.folds = parse_number<int>(key, value, line_no);
        } else if (key == "eval.seed") {
            c.seed = parse_number<std::uint64_t>(key, value, line_no);
        } else if (key == "eval.k_values") {
            c.k_values = parse_int_list(key, value, line_no);
        } else {
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": unknown key " + std::string(key));
        }
    }
    validate(c);
    return c;
}

inline std::string write_config(const PipelineConfig& c) {
    std::string s = canonical_text(c.features);
    s += "knn.k=" + std::to_string(c.k) + "\n";
    s += "eval.folds=" + std::to_string(c.folds) + "\n";
    s += "eval.seed=" + std::to_string(c.seed) + "\n";
    s += "eval.k_values=";
    for (std::size_t i = 0; i < c.k_values.size(); ++i) s += (i ? "," : "") + std::to_string(c.k_values[i]);
    return s + "\n";
}

inline PipelineConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Explicit path, else $VOICEGATE_CONFIG, else built-in defaults.
inline PipelineConfig resolve_config(const std::optional<std::filesystem::path>& path) {
    if (path && !path->empty()) return load_config_file(*path);
    if (const char* env = std::getenv("VOICEGATE_CONFIG"); env && *env) return load_config_file(env);
    return PipelineConfig{};
}

}  // namespace voicegate

#endif
