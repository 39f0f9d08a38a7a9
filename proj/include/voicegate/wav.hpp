#ifndef VOICEGATE_WAV_HPP
#define VOICEGATE_WAV_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "signal.hpp"

namespace voicegate {

namespace wav_detail {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

// Decodes one little-endian sample into [-1, 1]. Integer types divide by the
// negative full-scale magnitude so -1.0 is reachable and +1.0 is never exceeded.
inline double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
    if (format == kFormatFloat) {
        double v = 0.0;
        if (bits == 32) {
            std::uint32_t raw = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
            float f;
            std::memcpy(&f, &raw, sizeof f);
            v = f;
        } else {
            std::uint64_t raw = 0;
            for (int i = 0; i < 8; ++i) raw |= static_cast<std::uint64_t>(p[i]) << (8 * i);
            std::memcpy(&v, &raw, sizeof v);
        }
        if (!std::isfinite(v)) return 0.0;
        return std::clamp(v, -1.0, 1.0);
    }
    switch (bits) {
        case 8:
            return (static_cast<int>(p[0]) - 128) / 128.0;
        case 16: {
            auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            return v / 32768.0;
        }
        case 24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v -= 0x1000000;
            return v / 8388608.0;
        }
        case 32: {
            std::uint32_t raw = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
            return static_cast<std::int32_t>(raw) / 2147483648.0;
        }
        default:
            return 0.0;
    }
}

}  // namespace wav_detail

/// Decodes a RIFF/WAVE byte stream into a mono signal. Accepts PCM integer
/// (8/16/24/32-bit), IEEE float (32/64-bit) and the extensible variants of
/// both; channels are averaged.
inline Signal decode_wav(std::span<const std::uint8_t> bytes) {
    using namespace wav_detail;
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        throw Error(ErrorKind::format, "missing RIFF/WAVE header");
    }

    bool have_fmt = false;
    std::uint16_t format = 0;
    int channels = 0;
    int bits = 0;
    std::uint32_t rate = 0;
    std::uint16_t block_align = 0;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = bytes.size() - body;

        if (tag_is(bytes, pos, "fmt ")) {
            if (chunk_size < 16 || available < 16) throw Error(ErrorKind::format, "truncated fmt chunk");
            format = read_u16(bytes, body);
            channels = read_u16(bytes, body + 2);
            rate = read_u32(bytes, body + 4);
            block_align = read_u16(bytes, body + 12);
            bits = read_u16(bytes, body + 14);
            if (format == kFormatExtensible) {
                if (chunk_size < 40 || available < 40) throw Error(ErrorKind::format, "truncated extensible fmt chunk");
                format = read_u16(bytes, body + 24);
            }
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            if (!have_fmt) throw Error(ErrorKind::format, "data chunk precedes fmt chunk");
            data = bytes.data() + body;
            // Streaming writers often leave a placeholder size; trust the bytes we have.
            data_size = std::min<std::size_t>(chunk_size, available);
            have_data = true;
            break;
        }
        if (chunk_size > available) break;
        pos = body + chunk_size + (chunk_size & 1u);
    }

    if (!have_fmt) throw Error(ErrorKind::format, "missing fmt chunk");
    if (format != kFormatPcm && format != kFormatFloat) {
        throw Error(ErrorKind::unsupported_format, "codec tag " + std::to_string(format));
    }
    const bool int_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
    const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
    if (!int_ok && !float_ok) {
        throw Error(ErrorKind::unsupported_format, std::to_string(bits) + "-bit samples");
    }
    if (channels < 1 || rate == 0) throw Error(ErrorKind::format, "invalid channel count or sample rate");
    const std::size_t bytes_per_sample = static_cast<std::size_t>(bits / 8);
    if (block_align < bytes_per_sample * static_cast<std::size_t>(channels)) {
        throw Error(ErrorKind::format, "block alignment smaller than one frame");
    }
    if (!have_data) throw Error(ErrorKind::format, "missing data chunk");

    const std::size_t frames = data_size / block_align;
    if (frames == 0) throw Error(ErrorKind::empty_audio, "data chunk holds no complete frame");

    Signal out;
    out.sample_rate_hz = static_cast<int>(rate);
    out.samples.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::uint8_t* frame = data + f * block_align;
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            acc += decode_sample(frame + static_cast<std::size_t>(c) * bytes_per_sample, format, bits);
        }
        out.samples[f] = acc / channels;
    }
    return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Signal read_wav(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return decode_wav(bytes);
}

/// Encodes a mono signal as 16-bit PCM, rounding to nearest and clipping.
inline std::vector<std::uint8_t> encode_wav_pcm16(const Signal& signal) {
    using namespace wav_detail;
    if (signal.sample_rate_hz <= 0) throw Error(ErrorKind::config, "sample rate must be positive");
    const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
    put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (double s : signal.samples) {
        const long q = std::lround(s * 32768.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
    }
    return out;
}

inline void write_wav_pcm16(const std::filesystem::path& path, const Signal& signal) {
    const auto bytes = encode_wav_pcm16(signal);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

}  // namespace voicegate

#endif
