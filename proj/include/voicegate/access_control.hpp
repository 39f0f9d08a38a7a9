#ifndef VOICEGATE_ACCESS_CONTROL_HPP
#define VOICEGATE_ACCESS_CONTROL_HPP

#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <json.hpp>

#include "error.hpp"
#include "knn.hpp"
#include "pipeline.hpp"

namespace voicegate {

inline constexpr std::size_t kSaltBytes = 16;
inline constexpr std::size_t kDigestBytes = 32;
inline constexpr int kDefaultPbkdf2Iterations = 200000;

struct CredentialEntry {
    std::array<std::uint8_t, kSaltBytes> salt{};
    std::vector<std::uint8_t> digest;
    std::string hash_scheme_id;  ///< "pbkdf2-sha256:<iterations>"
};

namespace credential_detail {

inline std::string scheme_id(int iterations) { return "pbkdf2-sha256:" + std::to_string(iterations); }

inline int iterations_of(const std::string& scheme) {
    constexpr std::string_view prefix = "pbkdf2-sha256:";
    if (scheme.rfind(prefix, 0) != 0) throw Error(ErrorKind::unsupported_format, "hash scheme " + scheme);
    const int iterations = std::stoi(scheme.substr(prefix.size()));
    if (iterations < 1) throw Error(ErrorKind::format, "hash scheme " + scheme);
    return iterations;
}

inline std::vector<std::uint8_t> derive(std::string_view password, std::span<const std::uint8_t> salt, int iterations) {
    std::vector<std::uint8_t> out(kDigestBytes);
    if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(), static_cast<int>(salt.size()),
                          iterations, EVP_sha256(), static_cast<int>(out.size()), out.data()) != 1) {
        throw Error(ErrorKind::io, "PBKDF2 derivation failed");
    }
    return out;
}

inline std::string hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (auto b : bytes) {
        s += digits[b >> 4];
        s += digits[b & 0xF];
    }
    return s;
}

inline std::vector<std::uint8_t> unhex(const std::string& s) {
    if (s.size() % 2) throw Error(ErrorKind::format, "odd-length hex string");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw Error(ErrorKind::format, "bad hex digit");
    };
    std::vector<std::uint8_t> out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
    return out;
}

}  // namespace credential_detail

/// Salted password digests per speaker. Plaintext never leaves enroll() and
/// verify(). Writers must be serialized by the caller.
class CredentialStore {
public:
    static constexpr int kFormatVersion = 1;

    void enroll(const std::string& speaker_id, std::string_view password, int iterations = kDefaultPbkdf2Iterations) {
        if (speaker_id.empty()) throw Error(ErrorKind::config, "empty speaker id");
        if (iterations < 1) throw Error(ErrorKind::config, "iterations must be positive");
        CredentialEntry entry;
        do {
            if (RAND_bytes(entry.salt.data(), static_cast<int>(entry.salt.size())) != 1) {
                throw Error(ErrorKind::io, "system RNG unavailable");
            }
        } while (salt_in_use(entry.salt, speaker_id));
        entry.digest = credential_detail::derive(password, entry.salt, iterations);
        entry.hash_scheme_id = credential_detail::scheme_id(iterations);
        entries_[speaker_id] = std::move(entry);
    }

    bool contains(const std::string& speaker_id) const { return entries_.count(speaker_id) != 0; }

    const CredentialEntry& entry(const std::string& speaker_id) const {
        const auto it = entries_.find(speaker_id);
        if (it == entries_.end()) throw Error(ErrorKind::unknown_speaker, "'" + speaker_id + "' has no credentials");
        return it->second;
    }

    /// Constant-time comparison of the derived digest against the stored one.
    bool matches(const std::string& speaker_id, std::string_view attempt) const {
        const auto& e = entry(speaker_id);
        const auto derived = credential_detail::derive(attempt, e.salt, credential_detail::iterations_of(e.hash_scheme_id));
        return derived.size() == e.digest.size() && CRYPTO_memcmp(derived.data(), e.digest.data(), derived.size()) == 0;
    }

    const std::map<std::string, CredentialEntry>& entries() const { return entries_; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["format"] = "voicegate-credentials";
        j["format_version"] = kFormatVersion;
        auto list = nlohmann::ordered_json::object();
        for (const auto& [id, e] : entries_) {
            list[id] = {{"scheme", e.hash_scheme_id}, {"salt", credential_detail::hex(e.salt)}, {"digest", credential_detail::hex(e.digest)}};
        }
        j["entries"] = list;
        return j;
    }

    static CredentialStore from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "voicegate-credentials") throw Error(ErrorKind::format, "not a credential file");
        if (j.value("format_version", 0) != kFormatVersion) throw Error(ErrorKind::unsupported_format, "credential file version");
        CredentialStore store;
        for (const auto& [id, e] : j.at("entries").items()) {
            CredentialEntry entry;
            const auto salt = credential_detail::unhex(e.at("salt").get<std::string>());
            if (salt.size() != kSaltBytes) throw Error(ErrorKind::format, "salt length for " + id);
            std::copy(salt.begin(), salt.end(), entry.salt.begin());
            entry.digest = credential_detail::unhex(e.at("digest").get<std::string>());
            entry.hash_scheme_id = e.at("scheme").get<std::string>();
            credential_detail::iterations_of(entry.hash_scheme_id);
            store.entries_[id] = std::move(entry);
        }
        return store;
    }

    /// Owner-only permissions; written to a temp file then renamed.
    void save(const std::filesystem::path& path) const {
        namespace fs = std::filesystem;
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
            fs::permissions(tmp, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
            out << to_json().dump(2) << "\n";
            if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
        }
        fs::rename(tmp, path);
    }

    static CredentialStore load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::io, "cannot open credentials " + path.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::format, path.string() + ": " + e.what());
        }
    }

private:
    bool salt_in_use(const std::array<std::uint8_t, kSaltBytes>& salt, const std::string& except) const {
        for (const auto& [id, e] : entries_) {
            if (id != except && e.salt == salt) return true;
        }
        return false;
    }

    std::map<std::string, CredentialEntry> entries_;
};

enum class AccessOutcome { granted, password_required, granted_by_password, denied };

inline const char* to_string(AccessOutcome o) {
    switch (o) {
        case AccessOutcome::granted: return "Granted";
        case AccessOutcome::password_required: return "PasswordRequired";
        case AccessOutcome::granted_by_password: return "GrantedByPassword";
        case AccessOutcome::denied: return "Denied";
    }
    return "?";
}

struct AccessDecision {
    AccessOutcome outcome = AccessOutcome::denied;
    std::string claimed_id;
    std::string predicted_id;
    double vote_fraction = 0.0;
    std::string audit_note;
};

struct AccessPolicy {
    /// When set, a matching prediction below this vote fraction still falls
    /// back to the password.
    std::optional<double> min_vote_fraction;
};

/// Speaker check for a claimed identity: Granted only when the prediction
/// equals the claim, otherwise PasswordRequired.
inline AccessDecision decide(const SpeakerModel& model, const std::string& claimed_id, const Signal& clip,
                             const FeatureConfig& config, const AccessPolicy& policy = {}) {
    if (!std::binary_search(model.label_set.begin(), model.label_set.end(), claimed_id)) {
        throw Error(ErrorKind::unknown_speaker, "'" + claimed_id + "' is not enrolled");
    }
    if (!model.mfcc_config_fingerprint.empty() && model.mfcc_config_fingerprint != fingerprint(config)) {
        throw Error(ErrorKind::fingerprint_mismatch, "model " + model.mfcc_config_fingerprint + " vs config " + fingerprint(config));
    }
    const auto prediction = predict(model, extract_clip_feature(clip, config));

    AccessDecision d;
    d.claimed_id = claimed_id;
    d.predicted_id = prediction.label;
    d.vote_fraction = prediction.vote_fraction;
    const bool confident = !policy.min_vote_fraction || prediction.vote_fraction >= *policy.min_vote_fraction;
    d.outcome = (prediction.label == claimed_id && confident) ? AccessOutcome::granted : AccessOutcome::password_required;

    std::ostringstream note;
    note << "predicted " << prediction.label << " with vote fraction " << prediction.vote_fraction;
    if (prediction.label == claimed_id && !confident) note << " (below confidence threshold)";
    d.audit_note = note.str();
    return d;
}

/// GrantedByPassword on a digest match, Denied otherwise.
inline AccessOutcome verify_password(const CredentialStore& store, const std::string& speaker_id, std::string_view attempt) {
    return store.matches(speaker_id, attempt) ? AccessOutcome::granted_by_password : AccessOutcome::denied;
}

/// Resolves a PasswordRequired decision with one password attempt.
inline AccessDecision complete_with_password(AccessDecision decision, const CredentialStore& store, std::string_view attempt) {
    if (decision.outcome != AccessOutcome::password_required) return decision;
    decision.outcome = verify_password(store, decision.claimed_id, attempt);
    decision.audit_note += decision.outcome == AccessOutcome::granted_by_password ? "; password accepted" : "; password rejected";
    return decision;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now()) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string audit_line(const AccessDecision& d, const std::string& timestamp) {
    return timestamp + ", " + d.claimed_id + ", " + d.predicted_id + ", " + to_string(d.outcome);
}

/// Appends `timestamp, claimed_id, predicted_id, outcome`.
inline void append_audit(const std::filesystem::path& path, const AccessDecision& d, const std::string& timestamp = utc_timestamp()) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(ErrorKind::io, "cannot append to " + path.string());
    out << audit_line(d, timestamp) << "\n";
}

}  // namespace voicegate

#endif
