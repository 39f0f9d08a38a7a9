#ifndef VOICEGATE_CLIP_FEATURES_HPP
#define VOICEGATE_CLIP_FEATURES_HPP

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"
#include "mfcc.hpp"

namespace voicegate {

/// One clip as a single point: per-coefficient means followed by
/// per-coefficient population standard deviations.
struct ClipFeature {
    std::vector<double> vector;
    std::string clip_id;
};

inline ClipFeature pool(const MfccMatrix& mfcc, std::string clip_id = {}) {
    const Matrix& m = mfcc.coeffs;
    if (m.rows() == 0) throw Error(ErrorKind::empty_feature, "MFCC matrix has no frames");
    const std::size_t n = m.cols();
    std::vector<double> mean(n, 0.0);
    std::vector<double> m2(n, 0.0);
    // Welford update per column.
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double count = static_cast<double>(r + 1);
        const auto row = m.row(r);
        for (std::size_t c = 0; c < n; ++c) {
            const double delta = row[c] - mean[c];
            mean[c] += delta / count;
            m2[c] += delta * (row[c] - mean[c]);
        }
    }
    ClipFeature out{std::vector<double>(2 * n), std::move(clip_id)};
    for (std::size_t c = 0; c < n; ++c) {
        out.vector[c] = mean[c];
        out.vector[n + c] = std::sqrt(std::max(0.0, m2[c] / static_cast<double>(m.rows())));
    }
    return out;
}

}  // namespace voicegate

#endif
