#include <gtest/gtest.h>

#include <sys/stat.h>

#include "fixtures.hpp"
#include "voicegate/access_control.hpp"
#include "voicegate/synth.hpp"

namespace vg = voicegate;
using namespace voicegate::testing;

namespace {

constexpr int kFastIterations = 1000;

struct Enrolled {
    vg::FeatureConfig config;
    vg::SpeakerModel model;
    std::vector<std::pair<vg::Signal, std::string>> train_clips;
    std::vector<std::pair<vg::Signal, std::string>> other_clips;
};

const Enrolled& enrolled() {
    static const Enrolled e = [] {
        Enrolled out;
        vg::SynthOptions opt;
        opt.duration_s = 0.5;
        std::vector<vg::LabeledFeature> points;
        for (int s = 0; s < 3; ++s) {
            const auto voice = vg::make_voice_profile(s, 3, 7);
            const std::string name = "spk" + std::to_string(s);
            for (int c = 0; c < 8; ++c) {
                auto clip = vg::synthesize_clip(voice, opt, static_cast<std::uint64_t>(100 * s + c));
                points.push_back({vg::extract_clip_feature(clip, out.config, name + "_" + std::to_string(c)), name});
                out.train_clips.emplace_back(std::move(clip), name);
            }
            for (int c = 0; c < 4; ++c) out.other_clips.emplace_back(vg::synthesize_clip(voice, opt, static_cast<std::uint64_t>(9000 + 100 * s + c)), name);
        }
        out.model = vg::fit(points, 1, vg::fingerprint(out.config));
        return out;
    }();
    return e;
}

}  // namespace

TEST(Decide, TrainingClipOfClaimedSpeakerIsGranted) {
    const auto& e = enrolled();
    for (const auto& [clip, speaker] : e.train_clips) {
        const auto d = vg::decide(e.model, speaker, clip, e.config);
        EXPECT_EQ(d.outcome, vg::AccessOutcome::granted);
        EXPECT_EQ(d.predicted_id, speaker);
        EXPECT_EQ(d.vote_fraction, 1.0);
    }
}

TEST(Decide, CrossClaimRequiresPassword) {
    const auto& e = enrolled();
    for (const auto& [clip, speaker] : e.other_clips) {
        const std::string wrong = speaker == "spk0" ? "spk2" : "spk0";
        const auto d = vg::decide(e.model, wrong, clip, e.config);
        EXPECT_EQ(d.outcome, vg::AccessOutcome::password_required);
        EXPECT_EQ(d.predicted_id, speaker);
    }
}

TEST(Decide, NeverGrantsOnMismatch) {
    const auto& e = enrolled();
    for (const auto& [clip, speaker] : e.other_clips) {
        for (const auto& claim : e.model.label_set) {
            const auto d = vg::decide(e.model, claim, clip, e.config);
            if (d.outcome == vg::AccessOutcome::granted) ASSERT_EQ(d.predicted_id, d.claimed_id);
            if (d.predicted_id != d.claimed_id) ASSERT_EQ(d.outcome, vg::AccessOutcome::password_required);
        }
    }
}

TEST(Decide, Errors) {
    const auto& e = enrolled();
    const auto& clip = e.train_clips.front().first;
    try {
        vg::decide(e.model, "nobody", clip, e.config);
        FAIL();
    } catch (const vg::Error& err) {
        EXPECT_EQ(err.kind(), vg::ErrorKind::unknown_speaker);
    }
    auto other = e.config;
    other.mfcc.num_filters = 30;
    try {
        vg::decide(e.model, "spk0", clip, other);
        FAIL();
    } catch (const vg::Error& err) {
        EXPECT_EQ(err.kind(), vg::ErrorKind::fingerprint_mismatch);
    }
    try {
        vg::decide(e.model, "spk0", vg::Signal{std::vector<double>(100), 16000}, e.config);
        FAIL();
    } catch (const vg::Error& err) {
        EXPECT_EQ(err.kind(), vg::ErrorKind::too_short);
    }
}

TEST(Decide, OptionalVoteThreshold) {
    std::vector<vg::LabeledFeature> pts = {{{{0.0}, "a"}, "A"}, {{{0.1}, "b"}, "A"}, {{{0.2}, "c"}, "B"}};
    // Feature space here is one-dimensional and unrelated to audio, so go through predict directly.
    const auto model = vg::fit(pts, 3);
    const auto p = vg::predict(model, std::vector<double>{0.0});
    EXPECT_EQ(p.label, "A");
    EXPECT_DOUBLE_EQ(p.vote_fraction, 2.0 / 3.0);

    const auto& e = enrolled();
    const auto& [clip, speaker] = e.train_clips.front();
    const auto strict = vg::decide(e.model, speaker, clip, e.config, vg::AccessPolicy{1.0});
    EXPECT_EQ(strict.outcome, vg::AccessOutcome::granted);
    auto model3 = e.model;
    model3.k = 3;
    const auto d = vg::decide(model3, speaker, clip, e.config, vg::AccessPolicy{1.01});
    EXPECT_EQ(d.outcome, vg::AccessOutcome::password_required);
    EXPECT_NE(d.audit_note.find("below confidence threshold"), std::string::npos);
}

TEST(Credentials, VerifyPassword) {
    vg::CredentialStore store;
    store.enroll("alice", "correct horse", kFastIterations);
    EXPECT_EQ(vg::verify_password(store, "alice", "correct horse"), vg::AccessOutcome::granted_by_password);
    EXPECT_EQ(vg::verify_password(store, "alice", "correct hors"), vg::AccessOutcome::denied);
    EXPECT_EQ(vg::verify_password(store, "alice", ""), vg::AccessOutcome::denied);
    try {
        vg::verify_password(store, "bob", "x");
        FAIL();
    } catch (const vg::Error& e) {
        EXPECT_EQ(e.kind(), vg::ErrorKind::unknown_speaker);
    }
    EXPECT_EQ(store.entry("alice").hash_scheme_id, "pbkdf2-sha256:1000");
}

TEST(Credentials, IdenticalPasswordsHaveDistinctSaltsAndDigests) {
    vg::CredentialStore store;
    for (int i = 0; i < 20; ++i) store.enroll("user" + std::to_string(i), "hunter2", kFastIterations);
    std::set<std::string> salts;
    std::set<std::string> digests;
    for (const auto& [id, e] : store.entries()) {
        salts.insert(std::string(e.salt.begin(), e.salt.end()));
        digests.insert(std::string(e.digest.begin(), e.digest.end()));
    }
    EXPECT_EQ(salts.size(), 20u);
    EXPECT_EQ(digests.size(), 20u);
}

TEST(Credentials, RoundTripPrintablePasswords) {
    vg::Rng rng(8);
    vg::CredentialStore store;
    for (int trial = 0; trial < 25; ++trial) {
        std::string pw;
        const std::size_t len = 1 + rng.below(40);
        for (std::size_t i = 0; i < len; ++i) pw += static_cast<char>(32 + rng.below(95));
        store.enroll("s", pw, 100);
        ASSERT_EQ(vg::verify_password(store, "s", pw), vg::AccessOutcome::granted_by_password) << pw;
    }
}

TEST(Credentials, CompleteWithPassword) {
    vg::CredentialStore store;
    store.enroll("spk0", "pw", kFastIterations);
    vg::AccessDecision pending{vg::AccessOutcome::password_required, "spk0", "spk1", 1.0, "predicted spk1"};
    EXPECT_EQ(vg::complete_with_password(pending, store, "pw").outcome, vg::AccessOutcome::granted_by_password);
    EXPECT_EQ(vg::complete_with_password(pending, store, "nope").outcome, vg::AccessOutcome::denied);
    vg::AccessDecision granted{vg::AccessOutcome::granted, "spk0", "spk0", 1.0, ""};
    EXPECT_EQ(vg::complete_with_password(granted, store, "nope").outcome, vg::AccessOutcome::granted);
}

TEST(Credentials, FileIsPrivateAndHasNoPlaintext) {
    TempDir dir("creds");
    vg::CredentialStore store;
    store.enroll("spk0", "plaintext-secret", kFastIterations);
    store.enroll("spk1", "another-secret", kFastIterations);
    const auto path = dir / "creds.json";
    store.save(path);

    struct stat st {};
    ASSERT_EQ(::stat(path.c_str(), &st), 0);
    EXPECT_EQ(st.st_mode & 0777, 0600);
    const auto text = read_text(path);
    EXPECT_EQ(text.find("plaintext-secret"), std::string::npos);
    EXPECT_EQ(text.find("another-secret"), std::string::npos);

    const auto loaded = vg::CredentialStore::load(path);
    EXPECT_EQ(vg::verify_password(loaded, "spk0", "plaintext-secret"), vg::AccessOutcome::granted_by_password);
    EXPECT_EQ(vg::verify_password(loaded, "spk1", "plaintext-secret"), vg::AccessOutcome::denied);

    write_bytes(dir / "bad.json", {'{', '}'});
    EXPECT_THROW(vg::CredentialStore::load(dir / "bad.json"), vg::Error);
}

TEST(Audit, LineFormatAndAppend) {
    TempDir dir("audit");
    vg::AccessDecision d{vg::AccessOutcome::denied, "spk0", "spk3", 0.5, "x"};
    EXPECT_EQ(vg::audit_line(d, "2024-01-02T03:04:05Z"), "2024-01-02T03:04:05Z, spk0, spk3, Denied");
    vg::append_audit(dir / "audit.log", d, "T1");
    d.outcome = vg::AccessOutcome::granted_by_password;
    vg::append_audit(dir / "audit.log", d, "T2");
    EXPECT_EQ(read_text(dir / "audit.log"), "T1, spk0, spk3, Denied\nT2, spk0, spk3, GrantedByPassword\n");
    EXPECT_EQ(vg::utc_timestamp(std::chrono::system_clock::time_point{}), "1970-01-01T00:00:00Z");
}
