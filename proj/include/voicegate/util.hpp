#ifndef VOICEGATE_UTIL_HPP
#define VOICEGATE_UTIL_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace voicegate {

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

}  // namespace voicegate

#endif
