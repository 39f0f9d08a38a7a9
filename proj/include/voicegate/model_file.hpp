#ifndef VOICEGATE_MODEL_FILE_HPP
#define VOICEGATE_MODEL_FILE_HPP

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "error.hpp"
#include "knn.hpp"

namespace voicegate {

/// A trained model together with the configuration that produced its features.
struct ModelFile {
    static constexpr int kFormatVersion = 1;

    PipelineConfig config;
    SpeakerModel model;
    std::string created;  ///< UTC timestamp; the only field allowed to vary between identical runs
};

inline nlohmann::ordered_json to_json(const ModelFile& m) {
    nlohmann::ordered_json j;
    j["format"] = "voicegate-model";
    j["format_version"] = ModelFile::kFormatVersion;
    j["created"] = m.created;
    j["fingerprint"] = m.model.mfcc_config_fingerprint;

    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    const std::string text = write_config(m.config);
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        const std::string line = text.substr(pos, eol - pos);
        const auto eq = line.find('=');
        config[line.substr(0, eq)] = line.substr(eq + 1);
        pos = eol + 1;
    }
    j["config"] = config;
    j["k"] = m.model.k;
    j["labels"] = m.model.label_set;
    auto points = nlohmann::ordered_json::array();
    for (const auto& p : m.model.points) {
        points.push_back({{"clip_id", p.feature.clip_id}, {"label", p.speaker_id}, {"vector", p.feature.vector}});
    }
    j["points"] = points;
    return j;
}

/// Rejects files whose header fingerprint disagrees with the embedded config.
inline ModelFile model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "voicegate-model") throw Error(ErrorKind::format, "not a voicegate model");
    if (j.value("format_version", 0) != ModelFile::kFormatVersion) {
        throw Error(ErrorKind::unsupported_format, "model format version " + j.value("format_version", nlohmann::json()).dump());
    }
    std::string text;
    for (const auto& [key, value] : j.at("config").items()) text += key + "=" + value.get<std::string>() + "\n";

    ModelFile m;
    m.config = parse_config(text);
    m.created = j.value("created", "");
    const std::string header = j.at("fingerprint").get<std::string>();
    if (header != fingerprint(m.config.features)) {
        throw Error(ErrorKind::fingerprint_mismatch, "header " + header + " vs embedded config " + fingerprint(m.config.features));
    }

    std::vector<LabeledFeature> points;
    for (const auto& p : j.at("points")) {
        points.push_back(LabeledFeature{ClipFeature{p.at("vector").get<std::vector<double>>(), p.at("clip_id").get<std::string>()},
                                        p.at("label").get<std::string>()});
    }
    m.model = fit(std::move(points), j.at("k").get<int>(), header);
    if (m.model.label_set != j.at("labels").get<std::vector<std::string>>()) {
        throw Error(ErrorKind::format, "label set does not match points");
    }
    return m;
}

inline void save_model(const std::filesystem::path& path, const ModelFile& m) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
        out << to_json(m).dump(1) << "\n";
        if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open model " + path.string());
    try {
        return model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::format, path.string() + ": " + e.what());
    }
}

}  // namespace voicegate

#endif
