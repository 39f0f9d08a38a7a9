#ifndef VOICEGATE_CORPUS_HPP
#define VOICEGATE_CORPUS_HPP

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <vector>

#include "error.hpp"
#include "signal.hpp"
#include "wav.hpp"

namespace voicegate {

struct SkippedFile {
    std::string path;
    std::string reason;
};

struct Corpus {
    std::vector<std::string> speakers;  ///< every speaker directory, even if all its files were skipped
    std::vector<LabeledClip> clips;
    std::vector<SkippedFile> skipped;
};

namespace corpus_detail {

inline bool has_wav_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".wav";
}

}  // namespace corpus_detail

/// Loads `<root>/<speaker_id>/*.wav`. Undecodable files are reported in
/// `skipped` rather than aborting the load. Output is ordered by path.
inline Corpus load_corpus(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(ErrorKind::io, "not a directory: " + root.string());

    std::vector<fs::path> speakers;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) speakers.push_back(entry.path());
    }
    if (speakers.empty()) throw Error(ErrorKind::empty_corpus, "no speaker directories under " + root.string());
    std::sort(speakers.begin(), speakers.end());

    Corpus corpus;
    for (const auto& dir : speakers) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && corpus_detail::has_wav_extension(entry.path())) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        const std::string speaker = dir.filename().string();
        corpus.speakers.push_back(speaker);
        for (const auto& file : files) {
            try {
                corpus.clips.push_back(LabeledClip{read_wav(file), speaker, file.string()});
            } catch (const Error& e) {
                corpus.skipped.push_back(SkippedFile{file.string(), e.what()});
            }
        }
    }
    return corpus;
}

}  // namespace voicegate

#endif
