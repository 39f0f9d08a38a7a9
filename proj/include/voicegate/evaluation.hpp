#ifndef VOICEGATE_EVALUATION_HPP
#define VOICEGATE_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "knn.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace voicegate {

using Dataset = std::vector<LabeledFeature>;

inline std::vector<std::string> distinct_labels(const Dataset& data) {
    std::set<std::string> labels;
    for (const auto& p : data) labels.insert(p.speaker_id);
    return {labels.begin(), labels.end()};
}

/// Stratified fold index per sample. Each label's members are shuffled with
/// the seed and dealt round-robin, continuing the deal across labels so fold
/// sizes stay balanced overall.
inline std::vector<int> stratified_folds(const Dataset& data, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorKind::config, "need at least two folds");
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < data.size(); ++i) members[data[i].speaker_id].push_back(i);
    if (members.empty()) throw Error(ErrorKind::insufficient_data, "empty dataset");
    const auto smallest = std::min_element(members.begin(), members.end(),
                                           [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
    if (smallest->second.size() < static_cast<std::size_t>(folds)) {
        throw Error(ErrorKind::insufficient_data, "smallest class '" + smallest->first + "' has " +
                                                      std::to_string(smallest->second.size()) + " samples, " +
                                                      std::to_string(folds) + " folds need at least " + std::to_string(folds));
    }
    Rng rng(seed);
    std::vector<int> assignment(data.size(), 0);
    std::size_t dealt = 0;
    for (auto& [label, idx] : members) {
        rng.shuffle(idx);
        for (std::size_t i : idx) assignment[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
    }
    return assignment;
}

struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<long>> counts;  ///< counts[true][predicted]

    explicit ConfusionMatrix(std::vector<std::string> l = {})
        : labels(std::move(l)), counts(labels.size(), std::vector<long>(labels.size(), 0)) {}

    std::size_t index_of(const std::string& label) const {
        const auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label) throw Error(ErrorKind::unknown_speaker, label);
        return static_cast<std::size_t>(it - labels.begin());
    }

    void add(const std::string& truth, const std::string& predicted) { ++counts[index_of(truth)][index_of(predicted)]; }

    long total() const {
        long n = 0;
        for (const auto& row : counts)
            for (long c : row) n += c;
        return n;
    }

    long trace() const {
        long n = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
        return n;
    }

    double accuracy() const { return total() == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(total()); }
};

struct KFoldResult {
    double accuracy = 0.0;  ///< mean of per-fold accuracies
    ConfusionMatrix confusion;
};

inline KFoldResult kfold_cv_detailed(const Dataset& data, int folds, int k_neighbors, std::uint64_t seed) {
    const auto assignment = stratified_folds(data, folds, seed);
    std::vector<std::size_t> fold_sizes(static_cast<std::size_t>(folds), 0);
    for (int f : assignment) ++fold_sizes[static_cast<std::size_t>(f)];
    const std::size_t largest_fold = *std::max_element(fold_sizes.begin(), fold_sizes.end());
    const std::size_t smallest_train = data.size() - largest_fold;
    if (k_neighbors < 1 || static_cast<std::size_t>(k_neighbors) > smallest_train) {
        throw Error(ErrorKind::insufficient_data, "k = " + std::to_string(k_neighbors) +
                                                      " exceeds the smallest training partition (" +
                                                      std::to_string(smallest_train) + ")");
    }

    KFoldResult result{0.0, ConfusionMatrix(distinct_labels(data))};
    for (int fold = 0; fold < folds; ++fold) {
        Dataset train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (assignment[i] == fold) {
                test.push_back(i);
            } else {
                train.push_back(data[i]);
            }
        }
        const auto model = fit(std::move(train), k_neighbors);
        std::size_t correct = 0;
        for (std::size_t i : test) {
            const auto p = predict(model, data[i].feature);
            if (p.label == data[i].speaker_id) ++correct;
            result.confusion.add(data[i].speaker_id, p.label);
        }
        result.accuracy += static_cast<double>(correct) / static_cast<double>(test.size());
    }
    result.accuracy /= folds;
    return result;
}

inline double kfold_cv(const Dataset& data, int folds, int k_neighbors, std::uint64_t seed) {
    return kfold_cv_detailed(data, folds, k_neighbors, seed).accuracy;
}

struct HoldoutResult {
    double accuracy = 0.0;
    double tie_rate = 0.0;  ///< fraction of predictions decided by a vote tie-break
    std::vector<Prediction> predictions;
};

inline HoldoutResult holdout_cv_detailed(const Dataset& train, const Dataset& test, int k_neighbors) {
    std::set<std::string> train_ids;
    for (const auto& p : train) train_ids.insert(p.feature.clip_id);
    for (const auto& p : test) {
        if (train_ids.count(p.feature.clip_id)) throw Error(ErrorKind::leakage, "clip '" + p.feature.clip_id + "' is in both sets");
    }
    if (test.empty()) throw Error(ErrorKind::insufficient_data, "empty test set");
    if (k_neighbors < 1 || static_cast<std::size_t>(k_neighbors) > train.size()) {
        throw Error(ErrorKind::insufficient_data, "k = " + std::to_string(k_neighbors) + " exceeds " +
                                                      std::to_string(train.size()) + " training points");
    }
    const auto model = fit(train, k_neighbors);
    HoldoutResult result;
    std::size_t correct = 0;
    std::size_t ties = 0;
    for (const auto& q : test) {
        auto p = predict(model, q.feature);
        if (p.label == q.speaker_id) ++correct;
        if (p.vote_tied) ++ties;
        result.predictions.push_back(std::move(p));
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
    result.tie_rate = static_cast<double>(ties) / static_cast<double>(test.size());
    return result;
}

inline double holdout_cv(const Dataset& train, const Dataset& test, int k_neighbors) {
    return holdout_cv_detailed(train, test, k_neighbors).accuracy;
}

/// Holdout entries are indeterminate when more than this fraction of test
/// predictions needed a vote tie-break.
inline constexpr double kIndeterminateTieRate = 0.5;

struct NeighborResult {
    int k = 0;
    double kfold_accuracy = 0.0;
    std::optional<double> holdout_accuracy;  ///< nullopt renders as "-"
    double holdout_tie_rate = 0.0;
};

struct EvalReport {
    std::vector<NeighborResult> per_k;
    int best_k = 0;
    ConfusionMatrix confusion;  ///< pooled k-fold predictions at best_k
    int fold_count = 0;
    std::uint64_t split_seed = 0;
};

struct HoldoutSplit {
    Dataset train;
    Dataset test;
};

/// First stratified fold becomes the test set.
inline HoldoutSplit stratified_holdout(const Dataset& data, int folds, std::uint64_t seed) {
    const auto assignment = stratified_folds(data, folds, seed);
    HoldoutSplit split;
    for (std::size_t i = 0; i < data.size(); ++i) (assignment[i] == 0 ? split.test : split.train).push_back(data[i]);
    return split;
}

/// One row per neighbor count: k-fold accuracy over `data` and holdout
/// accuracy over `holdout` (derived from `data` when not supplied).
inline EvalReport sweep_neighbors(const Dataset& data, const std::vector<int>& k_values, int folds, std::uint64_t seed,
                                  std::optional<HoldoutSplit> holdout = std::nullopt) {
    if (k_values.empty()) throw Error(ErrorKind::config, "no neighbor counts to sweep");
    if (!holdout) holdout = stratified_holdout(data, folds, seed);

    EvalReport report;
    report.fold_count = folds;
    report.split_seed = seed;
    double best_accuracy = -1.0;
    for (int k : k_values) {
        const auto kfold = kfold_cv_detailed(data, folds, k, seed);
        NeighborResult row{k, kfold.accuracy, std::nullopt, 0.0};
        if (k >= 1 && static_cast<std::size_t>(k) <= holdout->train.size()) {
            const auto h = holdout_cv_detailed(holdout->train, holdout->test, k);
            row.holdout_tie_rate = h.tie_rate;
            if (h.tie_rate <= kIndeterminateTieRate) row.holdout_accuracy = h.accuracy;
        }
        if (kfold.accuracy > best_accuracy) {
            best_accuracy = kfold.accuracy;
            report.best_k = k;
            report.confusion = kfold.confusion;
        }
        report.per_k.push_back(row);
    }
    return report;
}

namespace evaluation_detail {

inline std::string percent_cell(double fraction) {
    const double pct = std::round(fraction * 1000.0) / 10.0;
    if (pct == std::floor(pct)) return std::to_string(static_cast<long>(pct));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", pct);
    return buf;
}

}  // namespace evaluation_detail

/// Tab-separated rows: neighbor counts, k-fold accuracy %, holdout accuracy %
/// ("-" when indeterminate).
inline std::string render_table(const std::vector<NeighborResult>& rows) {
    std::string neighbors = "Number of neighbors";
    std::string kfold = "K-fold accuracy";
    std::string holdout = "Holdout accuracy";
    for (const auto& r : rows) {
        neighbors += "\t" + std::to_string(r.k);
        kfold += "\t" + evaluation_detail::percent_cell(r.kfold_accuracy);
        holdout += "\t" + (r.holdout_accuracy ? evaluation_detail::percent_cell(*r.holdout_accuracy) : std::string("-"));
    }
    return neighbors + "\n" + kfold + "\n" + holdout + "\n";
}

inline nlohmann::ordered_json to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["fold_count"] = report.fold_count;
    j["split_seed"] = report.split_seed;
    j["best_k"] = report.best_k;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.per_k) {
        nlohmann::ordered_json row;
        row["k"] = r.k;
        row["kfold_accuracy"] = r.kfold_accuracy;
        if (r.holdout_accuracy) {
            row["holdout_accuracy"] = *r.holdout_accuracy;
        } else {
            row["holdout_accuracy"] = "indeterminate";
        }
        row["holdout_tie_rate"] = r.holdout_tie_rate;
        rows.push_back(row);
    }
    j["per_k"] = rows;
    j["confusion"] = {{"labels", report.confusion.labels}, {"counts", report.confusion.counts}};
    return j;
}

}  // namespace voicegate

#endif
