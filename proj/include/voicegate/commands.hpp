#ifndef VOICEGATE_COMMANDS_HPP
#define VOICEGATE_COMMANDS_HPP

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "access_control.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "evaluation.hpp"
#include "model_file.hpp"
#include "pipeline.hpp"
#include "synth.hpp"
#include "util.hpp"
#include "wav.hpp"

namespace voicegate::cli {

enum ExitCode : int { kSuccess = 0, kMismatch = 1, kUsage = 2, kDataError = 3 };

inline int exit_code_for(const Error& e) { return e.kind() == ErrorKind::config ? kUsage : kDataError; }

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

/// Runs a command body, mapping failures to a diagnostic and exit code.
template <typename Body>
int guarded(const char* command, Streams io, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        io.err << command << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        io.err << command << ": " << e.what() << "\n";
        return kDataError;
    }
}

inline Streams standard_streams() { return {std::cin, std::cout, std::cerr}; }

/// A synthetic-style root holds `train/` (and optionally `test/`) speaker trees;
/// anything else is a single speaker tree.
struct CorpusLayout {
    std::filesystem::path train;
    std::optional<std::filesystem::path> test;
};

inline CorpusLayout resolve_layout(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::is_directory(root / "train", ec)) {
        CorpusLayout layout{root / "train", std::nullopt};
        if (fs::is_directory(root / "test", ec)) layout.test = root / "test";
        return layout;
    }
    return {root, std::nullopt};
}

inline std::string clip_id_for(const LabeledClip& clip) { return std::filesystem::path(clip.source_path).stem().string(); }

/// Features for every clip, in corpus order. Work is spread over `jobs`
/// threads; the first failing clip (by corpus order) is reported.
inline Dataset featurize(const std::vector<LabeledClip>& clips, const FeatureConfig& config, int jobs = 1) {
    Dataset out(clips.size());
    std::vector<std::exception_ptr> failures(clips.size());
    auto work = [&](std::size_t start, std::size_t stride) {
        for (std::size_t i = start; i < clips.size(); i += stride) {
            try {
                out[i] = LabeledFeature{extract_clip_feature(clips[i].signal, config, clip_id_for(clips[i])), clips[i].speaker_id};
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const Error& e) {
            throw Error(e.kind(), clips[i].source_path + ": " + e.what());
        }
    }
    return out;
}

inline void report_skips(const Corpus& corpus, std::ostream& err) {
    for (const auto& s : corpus.skipped) err << "skipped " << s.path << " (" << s.reason << ")\n";
}

/// Loads a speaker tree and requires at least one decodable clip per speaker.
inline Corpus load_checked_corpus(const std::filesystem::path& dir, std::ostream& err) {
    Corpus corpus = load_corpus(dir);
    report_skips(corpus, err);
    std::map<std::string, int> counts;
    for (const auto& c : corpus.clips) ++counts[c.speaker_id];
    for (const auto& s : corpus.speakers) {
        if (counts[s] == 0) throw Error(ErrorKind::insufficient_data, "speaker '" + s + "' has no decodable clips in " + dir.string());
    }
    return corpus;
}

// ---------------------------------------------------------------------------

struct TrainOptions {
    std::filesystem::path corpus_dir;
    std::optional<std::filesystem::path> config_path;
    std::optional<int> k;
    std::filesystem::path model_out;
    int jobs = 1;
};

inline ModelFile train_model(const TrainOptions& opt, std::ostream& err) {
    PipelineConfig config = resolve_config(opt.config_path);
    if (opt.k) config.k = *opt.k;
    validate(config);
    const auto layout = resolve_layout(opt.corpus_dir);
    const Corpus corpus = load_checked_corpus(layout.train, err);
    ModelFile m;
    m.config = config;
    m.model = fit(featurize(corpus.clips, config.features, opt.jobs), config.k, fingerprint(config.features));
    m.created = utc_timestamp();
    return m;
}

inline int cmd_train(const TrainOptions& opt, Streams io) {
    return guarded("train", io, [&]() -> int {
        const ModelFile m = train_model(opt, io.err);
        save_model(opt.model_out, m);
        io.out << "trained " << m.model.points.size() << " clips from " << m.model.label_set.size() << " speakers, k = "
               << m.model.k << " -> " << opt.model_out.string() << "\n";
        return kSuccess;
    });
}

// ---------------------------------------------------------------------------

using PasswordReader = std::function<std::optional<std::string>(const std::string& prompt)>;

inline PasswordReader line_reader(Streams io) {
    return [io](const std::string& prompt) -> std::optional<std::string> {
        io.err << prompt << std::flush;
        std::string line;
        if (!std::getline(io.in, line)) return std::nullopt;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
}

struct IdentifyOptions {
    std::filesystem::path model_path;
    std::filesystem::path wav_path;
    std::optional<std::string> claim;
    bool no_interactive = false;
    std::optional<std::filesystem::path> credentials_path;
    std::optional<std::filesystem::path> audit_log;
    std::optional<std::filesystem::path> config_path;
    std::optional<double> min_vote_fraction;
};

inline int cmd_identify(const IdentifyOptions& opt, Streams io, PasswordReader read_password = {}) {
    return guarded("identify", io, [&]() -> int {
        const ModelFile m = load_model(opt.model_path);
        const char* env = std::getenv("VOICEGATE_CONFIG");
        if (opt.config_path || (env && *env)) {
            const PipelineConfig config = resolve_config(opt.config_path);
            if (fingerprint(config.features) != m.model.mfcc_config_fingerprint) {
                throw Error(ErrorKind::fingerprint_mismatch, "model was built with " + m.model.mfcc_config_fingerprint +
                                                                 ", config is " + fingerprint(config.features) + "; refusing to run");
            }
        }
        const Signal clip = read_wav(opt.wav_path);

        if (!opt.claim) {
            const auto p = predict(m.model, extract_clip_feature(clip, m.config.features));
            io.out << "predicted: " << p.label << "\n";
            io.out << "vote_fraction: " << p.vote_fraction << "\n";
            for (const auto& n : p.neighbors) io.out << "  " << n.clip_id << " " << n.speaker_id << " " << n.distance << "\n";
            return kSuccess;
        }

        AccessPolicy policy{opt.min_vote_fraction};
        AccessDecision d = decide(m.model, *opt.claim, clip, m.config.features, policy);
        if (d.outcome == AccessOutcome::password_required) {
            std::optional<std::string> attempt;
            if (opt.no_interactive) {
                d.audit_note += "; password prompt suppressed";
            } else {
                if (!read_password) read_password = line_reader(io);
                attempt = read_password("Password for " + d.claimed_id + ": ");
            }
            std::optional<CredentialStore> store;
            if (attempt && opt.credentials_path) store = CredentialStore::load(*opt.credentials_path);
            if (attempt && store && store->contains(d.claimed_id)) {
                d = complete_with_password(d, *store, *attempt);
            } else {
                if (attempt) d.audit_note += "; no credentials for claimed speaker";
                d.outcome = AccessOutcome::denied;
            }
        }
        if (opt.audit_log) append_audit(*opt.audit_log, d);
        io.out << to_string(d.outcome) << "\n";
        io.out << "claimed: " << d.claimed_id << "\npredicted: " << d.predicted_id << "\nvote_fraction: " << d.vote_fraction << "\n";
        io.out << "note: " << d.audit_note << "\n";
        const bool ok = d.outcome == AccessOutcome::granted || d.outcome == AccessOutcome::granted_by_password;
        return ok ? kSuccess : kMismatch;
    });
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
    std::filesystem::path corpus_dir;
    std::optional<std::filesystem::path> config_path;
    std::optional<std::vector<int>> k_values;
    std::optional<int> folds;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> report_out;
    int jobs = 1;
};

struct Evaluation {
    PipelineConfig config;
    EvalReport report;
    bool split_layout = false;
};

/// With a train/test layout, k-fold runs over both trees together and the
/// holdout is train -> test; otherwise the holdout is the first stratified fold.
inline Evaluation run_evaluation(const EvaluateOptions& opt, std::ostream& err) {
    Evaluation ev;
    ev.config = resolve_config(opt.config_path);
    if (opt.k_values) ev.config.k_values = *opt.k_values;
    if (opt.folds) ev.config.folds = *opt.folds;
    if (opt.seed) ev.config.seed = *opt.seed;
    validate(ev.config);

    const auto layout = resolve_layout(opt.corpus_dir);
    const Corpus train_corpus = load_checked_corpus(layout.train, err);
    Dataset train = featurize(train_corpus.clips, ev.config.features, opt.jobs);
    std::optional<HoldoutSplit> holdout;
    Dataset all = train;
    if (layout.test) {
        const Corpus test_corpus = load_checked_corpus(*layout.test, err);
        Dataset test = featurize(test_corpus.clips, ev.config.features, opt.jobs);
        all.insert(all.end(), test.begin(), test.end());
        holdout = HoldoutSplit{std::move(train), std::move(test)};
        ev.split_layout = true;
    }
    ev.report = sweep_neighbors(all, ev.config.k_values, ev.config.folds, ev.config.seed, std::move(holdout));
    return ev;
}

inline nlohmann::ordered_json evaluation_json(const Evaluation& ev) {
    nlohmann::ordered_json j;
    j["format"] = "voicegate-report";
    j["format_version"] = 1;
    j["config"] = write_config(ev.config);
    j["fingerprint"] = fingerprint(ev.config.features);
    j["holdout_source"] = ev.split_layout ? "test directory" : "first stratified fold";
    j["report"] = to_json(ev.report);
    return j;
}

inline void print_evaluation(const Evaluation& ev, std::ostream& out) {
    out << render_table(ev.report.per_k);
    out << "folds: " << ev.report.fold_count << ", seed: " << ev.report.split_seed << ", best k: " << ev.report.best_k << "\n";
    out << "confusion (rows = true, columns = predicted):\n";
    for (std::size_t i = 0; i < ev.report.confusion.labels.size(); ++i) {
        out << ev.report.confusion.labels[i];
        for (long c : ev.report.confusion.counts[i]) out << "\t" << c;
        out << "\n";
    }
}

inline int cmd_evaluate(const EvaluateOptions& opt, Streams io) {
    return guarded("evaluate", io, [&]() -> int {
        const Evaluation ev = run_evaluation(opt, io.err);
        print_evaluation(ev, io.out);
        const auto path = opt.report_out.value_or("voicegate_report.json");
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
        f << evaluation_json(ev).dump(2) << "\n";
        io.out << "report written to " << path.string() << "\n";
        return kSuccess;
    });
}

// ---------------------------------------------------------------------------

struct ExtractOptions {
    std::filesystem::path wav_path;
    std::optional<std::filesystem::path> config_path;
    std::filesystem::path csv_out;
};

/// `clip_id,frame_index,c1..cN`, shortest round-trip decimals.
inline std::string mfcc_csv(const std::string& clip_id, const MfccMatrix& m) {
    std::string s = "clip_id,frame_index";
    for (std::size_t c = 0; c < m.coeffs.cols(); ++c) s += ",c" + std::to_string(c + 1);
    s += "\n";
    for (std::size_t r = 0; r < m.coeffs.rows(); ++r) {
        s += clip_id + "," + std::to_string(r);
        for (double v : m.coeffs.row(r)) s += "," + format_double(v);
        s += "\n";
    }
    return s;
}

inline int cmd_extract(const ExtractOptions& opt, Streams io) {
    return guarded("extract", io, [&]() -> int {
        const PipelineConfig config = resolve_config(opt.config_path);
        const Signal signal = read_wav(opt.wav_path);
        const Signal cleaned = config.features.denoise_enabled ? denoise(signal, config.features.wavelet) : signal;
        const MfccMatrix m = extract_mfcc(cleaned, config.features.mfcc);
        std::ofstream f(opt.csv_out, std::ios::trunc);
        if (!f) throw Error(ErrorKind::io, "cannot write " + opt.csv_out.string());
        f << mfcc_csv(opt.wav_path.stem().string(), m);
        io.out << m.coeffs.rows() << " frames x " << m.coeffs.cols() << " coefficients -> " << opt.csv_out.string() << "\n";
        return kSuccess;
    });
}

// ---------------------------------------------------------------------------

inline int cmd_synth(const std::filesystem::path& out_dir, const SynthOptions& opt, Streams io) {
    return guarded("synth", io, [&]() -> int {
        const auto summary = write_synthetic_corpus(out_dir, opt);
        io.out << "wrote " << summary.files_written << " clips for " << summary.speakers.size() << " speakers under "
               << out_dir.string() << "\n";
        return kSuccess;
    });
}

// ---------------------------------------------------------------------------

struct PasswdOptions {
    std::filesystem::path credentials_path;
    std::string speaker_id;
    int iterations = kDefaultPbkdf2Iterations;
};

/// Sets a speaker's fallback password, creating the store when absent.
inline int cmd_passwd(const PasswdOptions& opt, Streams io, PasswordReader read_password = {}) {
    return guarded("passwd", io, [&]() -> int {
        CredentialStore store;
        std::error_code ec;
        if (std::filesystem::exists(opt.credentials_path, ec)) store = CredentialStore::load(opt.credentials_path);
        if (!read_password) read_password = line_reader(io);
        const auto password = read_password("New password for " + opt.speaker_id + ": ");
        if (!password || password->empty()) throw Error(ErrorKind::config, "empty password");
        store.enroll(opt.speaker_id, *password, opt.iterations);
        store.save(opt.credentials_path);
        io.out << "credentials updated for " << opt.speaker_id << "\n";
        return kSuccess;
    });
}

}  // namespace voicegate::cli

#endif
