#include <termios.h>
#include <unistd.h>

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "voicegate/commands.hpp"

namespace {

// Reads one line from stdin, without echo when stdin is a terminal.
std::optional<std::string> read_secret(const std::string& prompt) {
    std::cerr << prompt << std::flush;
    termios saved{};
    const bool tty = isatty(STDIN_FILENO) && tcgetattr(STDIN_FILENO, &saved) == 0;
    if (tty) {
        termios quiet = saved;
        quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
    }
    std::string line;
    const bool ok = static_cast<bool>(std::getline(std::cin, line));
    if (tty) {
        tcsetattr(STDIN_FILENO, TCSANOW, &saved);
        std::cerr << "\n";
    }
    if (!ok) return std::nullopt;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

int main(int argc, char** argv) {
    namespace vc = voicegate::cli;
    CLI::App app{"voicegate: MFCC + kNN speaker identification with password fallback"};
    app.require_subcommand(1);
    int jobs = 1;

    vc::TrainOptions train;
    std::string train_config;
    auto* train_cmd = app.add_subcommand("train", "Extract features from a corpus and write a model");
    train_cmd->add_option("corpus", train.corpus_dir, "Corpus root (<root>/<speaker>/*.wav, or a synth output dir)")->required();
    train_cmd->add_option("-c,--config", train_config, "Config file (falls back to $VOICEGATE_CONFIG)");
    train_cmd->add_option("-k,--k", train.k, "Neighbor count (overrides knn.k)");
    train_cmd->add_option("-o,--out", train.model_out, "Model file to write")->required();
    train_cmd->add_option("-j,--jobs", jobs, "Feature extraction threads")->check(CLI::Range(1, 64));

    vc::IdentifyOptions identify;
    std::string identify_config, credentials, audit;
    auto* identify_cmd = app.add_subcommand("identify", "Predict the speaker of a clip, or check a claimed identity");
    identify_cmd->add_option("model", identify.model_path, "Model file")->required();
    identify_cmd->add_option("wav", identify.wav_path, "Clip to identify")->required();
    identify_cmd->add_option("--claim", identify.claim, "Claimed speaker id; enables the access flow");
    identify_cmd->add_flag("--no-interactive", identify.no_interactive, "Never prompt; a mismatch is denied");
    identify_cmd->add_option("--credentials", credentials, "Credential store for the password fallback");
    identify_cmd->add_option("--audit-log", audit, "Append the decision to this log");
    identify_cmd->add_option("-c,--config", identify_config, "Config that must match the model fingerprint");
    identify_cmd->add_option("--min-vote-fraction", identify.min_vote_fraction, "Require this vote fraction to grant")
        ->check(CLI::Range(0.0, 1.0));

    vc::EvaluateOptions evaluate;
    std::string evaluate_config, k_values, report;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Cross-validate accuracy over a range of neighbor counts");
    evaluate_cmd->add_option("corpus", evaluate.corpus_dir, "Corpus root")->required();
    evaluate_cmd->add_option("-c,--config", evaluate_config, "Config file (falls back to $VOICEGATE_CONFIG)");
    evaluate_cmd->add_option("--k-values", k_values, "Comma-separated neighbor counts, e.g. 2,3,4,5,6");
    evaluate_cmd->add_option("--folds", evaluate.folds, "Number of folds")->check(CLI::Range(2, 1000));
    evaluate_cmd->add_option("--seed", evaluate.seed, "Split seed");
    evaluate_cmd->add_option("--report", report, "JSON report path (default voicegate_report.json)");
    evaluate_cmd->add_option("-j,--jobs", jobs, "Feature extraction threads")->check(CLI::Range(1, 64));

    vc::ExtractOptions extract;
    std::string extract_config;
    auto* extract_cmd = app.add_subcommand("extract", "Dump per-frame MFCCs of one clip as CSV");
    extract_cmd->add_option("wav", extract.wav_path, "Input clip")->required();
    extract_cmd->add_option("-c,--config", extract_config, "Config file (falls back to $VOICEGATE_CONFIG)");
    extract_cmd->add_option("-o,--out", extract.csv_out, "CSV output")->required();

    voicegate::SynthOptions synth;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic multi-speaker corpus");
    synth_cmd->add_option("out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--speakers", synth.speakers, "Number of speakers")->check(CLI::Range(1, 99));
    synth_cmd->add_option("--train", synth.train_per_speaker, "Training clips per speaker")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--test", synth.test_per_speaker, "Test clips per speaker")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->add_option("--sample-rate", synth.sample_rate_hz, "Sample rate in Hz")->check(CLI::Range(1000, 192000));
    synth_cmd->add_option("--duration", synth.duration_s, "Clip length in seconds")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--snr-db", synth.snr_db, "Additive noise level");
    synth_cmd->add_flag("--shuffle-voices", synth.shuffle_voices, "Voice each clip with a random speaker (chance-level control)");

    vc::PasswdOptions passwd;
    auto* passwd_cmd = app.add_subcommand("passwd", "Set a speaker's fallback password (read from stdin)");
    passwd_cmd->add_option("--credentials", passwd.credentials_path, "Credential store file")->required();
    passwd_cmd->add_option("--speaker", passwd.speaker_id, "Speaker id")->required();
    passwd_cmd->add_option("--iterations", passwd.iterations, "PBKDF2 iterations")->check(CLI::Range(1, 100000000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return vc::kUsage;
    }

    auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
        if (s.empty()) return std::nullopt;
        return std::filesystem::path(s);
    };
    const auto io = vc::standard_streams();

    if (*train_cmd) {
        train.config_path = opt_path(train_config);
        train.jobs = jobs;
        return vc::cmd_train(train, io);
    }
    if (*identify_cmd) {
        identify.config_path = opt_path(identify_config);
        identify.credentials_path = opt_path(credentials);
        identify.audit_log = opt_path(audit);
        return vc::cmd_identify(identify, io, read_secret);
    }
    if (*evaluate_cmd) {
        evaluate.config_path = opt_path(evaluate_config);
        evaluate.report_out = opt_path(report);
        evaluate.jobs = jobs;
        if (!k_values.empty()) {
            try {
                evaluate.k_values = voicegate::parse_k_list(k_values);
            } catch (const voicegate::Error& e) {
                std::cerr << "evaluate: --k-values: " << e.what() << "\n";
                return vc::kUsage;
            }
        }
        return vc::cmd_evaluate(evaluate, io);
    }
    if (*extract_cmd) {
        extract.config_path = opt_path(extract_config);
        return vc::cmd_extract(extract, io);
    }
    if (*synth_cmd) return vc::cmd_synth(synth_out, synth, io);
    if (*passwd_cmd) return vc::cmd_passwd(passwd, io, read_secret);
    return vc::kUsage;
}
