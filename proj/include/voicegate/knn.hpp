#ifndef VOICEGATE_KNN_HPP
#define VOICEGATE_KNN_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clip_features.hpp"
#include "error.hpp"

namespace voicegate {

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::shape, "dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

struct LabeledFeature {
    ClipFeature feature;
    std::string speaker_id;
};

struct SpeakerModel {
    std::vector<LabeledFeature> points;
    int k = 1;
    std::string mfcc_config_fingerprint;
    std::vector<std::string> label_set;  ///< sorted distinct labels

    std::size_t dimension() const { return points.empty() ? 0 : points.front().feature.vector.size(); }
};

struct Neighbor {
    std::string clip_id;
    std::string speaker_id;
    double distance = 0.0;
};

struct Prediction {
    std::string label;
    double vote_fraction = 0.0;
    std::vector<Neighbor> neighbors;  ///< ascending distance
    bool vote_tied = false;           ///< another label had the same top vote count
};

/// Stores the training set verbatim. kNN has no optimization phase.
inline SpeakerModel fit(std::vector<LabeledFeature> training, int k, std::string fingerprint = {}) {
    if (training.empty()) throw Error(ErrorKind::config, "training set is empty");
    if (k < 1) throw Error(ErrorKind::config, "k must be at least 1");
    if (static_cast<std::size_t>(k) > training.size()) {
        throw Error(ErrorKind::config, "k = " + std::to_string(k) + " exceeds " + std::to_string(training.size()) + " points");
    }
    const std::size_t dim = training.front().feature.vector.size();
    for (const auto& p : training) {
        if (p.feature.vector.size() != dim) throw Error(ErrorKind::shape, "mixed feature dimensions in training set");
        if (p.speaker_id.empty()) throw Error(ErrorKind::config, "empty speaker label");
    }
    SpeakerModel model;
    model.k = k;
    model.mfcc_config_fingerprint = std::move(fingerprint);
    for (const auto& p : training) model.label_set.push_back(p.speaker_id);
    std::sort(model.label_set.begin(), model.label_set.end());
    model.label_set.erase(std::unique(model.label_set.begin(), model.label_set.end()), model.label_set.end());
    model.points = std::move(training);
    return model;
}

/// Majority vote over the k nearest points. Equal distances keep training
/// order; equal vote counts go to the label with the closest member, then to
/// the earlier label in `label_set`.
inline Prediction predict(const SpeakerModel& model, std::span<const double> query) {
    if (query.size() != model.dimension()) {
        throw Error(ErrorKind::shape, "query dimension " + std::to_string(query.size()) + ", model dimension " +
                                          std::to_string(model.dimension()));
    }
    const auto k = static_cast<std::size_t>(model.k);
    std::vector<std::pair<double, std::size_t>> order(model.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = {euclidean_distance(model.points[i].feature.vector, query), i};
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());

    struct Tally {
        int votes = 0;
        double nearest = 0.0;
    };
    std::vector<Tally> tally(model.label_set.size());
    Prediction out;
    for (std::size_t r = 0; r < k; ++r) {
        const auto& point = model.points[order[r].second];
        out.neighbors.push_back(Neighbor{point.feature.clip_id, point.speaker_id, order[r].first});
        const auto label_index = static_cast<std::size_t>(
            std::lower_bound(model.label_set.begin(), model.label_set.end(), point.speaker_id) - model.label_set.begin());
        if (tally[label_index].votes++ == 0) tally[label_index].nearest = order[r].first;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < tally.size(); ++i) {
        if (tally[i].votes > tally[best].votes ||
            (tally[i].votes == tally[best].votes && tally[i].votes > 0 && tally[i].nearest < tally[best].nearest)) {
            best = i;
        }
    }
    for (std::size_t i = 0; i < tally.size(); ++i) {
        if (i != best && tally[i].votes == tally[best].votes) out.vote_tied = true;
    }
    out.label = model.label_set[best];
    out.vote_fraction = static_cast<double>(tally[best].votes) / static_cast<double>(k);
    return out;
}

inline Prediction predict(const SpeakerModel& model, const ClipFeature& query) { return predict(model, query.vector); }

}  // namespace voicegate

#endif
