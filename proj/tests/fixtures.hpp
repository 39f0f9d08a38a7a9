#ifndef VOICEGATE_TESTS_FIXTURES_HPP
#define VOICEGATE_TESTS_FIXTURES_HPP

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "voicegate/rng.hpp"
#include "voicegate/signal.hpp"

namespace voicegate::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("voicegate_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

/// Minimal WAV writer for fixtures: raw interleaved sample bytes plus header.
inline std::vector<std::uint8_t> make_wav(std::uint16_t format, int channels, int rate, int bits,
                                          const std::vector<std::uint8_t>& data) {
    std::vector<std::uint8_t> out;
    const auto block = static_cast<std::uint16_t>(channels * bits / 8);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, static_cast<std::uint32_t>(36 + data.size()));
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, format);
    put_u16(out, static_cast<std::uint16_t>(channels));
    put_u32(out, static_cast<std::uint32_t>(rate));
    put_u32(out, static_cast<std::uint32_t>(rate) * block);
    put_u16(out, block);
    put_u16(out, static_cast<std::uint16_t>(bits));
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

inline std::vector<std::uint8_t> pcm16_bytes(const std::vector<std::int16_t>& samples) {
    std::vector<std::uint8_t> out;
    for (auto s : samples) put_u16(out, static_cast<std::uint16_t>(s));
    return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline Signal sine(double freq_hz, double amplitude, int rate, std::size_t n) {
    Signal s{std::vector<double>(n), rate};
    for (std::size_t i = 0; i < n; ++i) s.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate);
    return s;
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline Signal gaussian_noise(Rng& rng, double sigma, int rate, std::size_t n) {
    Signal s{std::vector<double>(n), rate};
    for (auto& x : s.samples) x = sigma * rng.gaussian();
    return s;
}

inline double variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

inline double energy(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

inline double snr_db(const std::vector<double>& clean, const std::vector<double>& observed) {
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        signal += clean[i] * clean[i];
        noise += (observed[i] - clean[i]) * (observed[i] - clean[i]);
    }
    return 10.0 * std::log10(signal / noise);
}

}  // namespace voicegate::testing

#endif
