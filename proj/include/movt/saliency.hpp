#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/model.hpp"
#include "movt/trackio.hpp"

namespace movt::saliency {

// Per-track input attribution for one clip. raw holds the unnormalized
// gradient norms; scores = raw / max(raw) (all zero when every raw norm is
// zero), so max(scores) == 1 whenever any gradient is nonzero.
struct ImportanceScores {
    std::string video_id;
    std::vector<double> raw;
    std::vector<double> scores;
};

// Scores each track by back-propagating from the ground-truth class logit to
// the model inputs (velocity block plus mean-position block) and taking the
// L2 norm of each track's input gradient. With grad_x_input the gradient is
// multiplied elementwise by the input before the norm. Parameter gradients
// are untouched. Templated so the finite-difference oracle can run in double.
template <typename T>
ImportanceScores track_importance(const model::MovTModel<T>& m, const trackio::PointTrackSet& set,
                                  std::size_t label, bool grad_x_input = false) {
    if (m.config().head != model::HeadKind::classification)
        throw ConfigError("track importance requires a classification head");
    if (label >= m.config().classes)
        throw DataError("label " + std::to_string(label) + " out of range for " +
                        std::to_string(m.config().classes) + " classes");
    if (!set.normalized) throw DataError("track set must be normalized before scoring");

    const trackio::VelocityTensor vel = trackio::compute_velocity(set);
    const std::vector<float> means = trackio::mean_position(set);
    const std::size_t n = set.tracks, t = set.frames;
    nn::Tensor<T> v({1, n, t, 3});
    for (std::size_t i = 0; i < vel.values.size(); ++i) v.data[i] = static_cast<T>(vel.values[i]);
    nn::Tensor<T> mp({1, n, 2});
    for (std::size_t i = 0; i < means.size(); ++i) mp.data[i] = static_cast<T>(means[i]);

    model::MovTCache<T> cache;
    (void)m.forward(v, mp, &cache, nullptr);
    nn::Tensor<T> d_out({1, m.config().classes});
    d_out.data[label] = T(1);
    const model::MovTInputGrads<T> g = m.backward(cache, d_out, /*param_grads=*/false);

    ImportanceScores out;
    out.video_id = set.video_id;
    out.raw.resize(n, 0.0);
    for (std::size_t ni = 0; ni < n; ++ni) {
        double sq = 0;
        for (std::size_t ti = 0; ti < t; ++ti) {
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t idx = (ni * t + ti) * 3 + c;
                double gv = static_cast<double>(g.d_velocity.data[idx]);
                if (grad_x_input) gv *= static_cast<double>(v.data[idx]);
                sq += gv * gv;
            }
        }
        for (std::size_t c = 0; c < 2; ++c) {
            double gm = static_cast<double>(g.d_means.data[ni * 2 + c]);
            if (grad_x_input) gm *= static_cast<double>(mp.data[ni * 2 + c]);
            sq += gm * gm;
        }
        out.raw[ni] = std::sqrt(sq);
    }
    const double mx = out.raw.empty() ? 0.0 : *std::max_element(out.raw.begin(), out.raw.end());
    out.scores.resize(n, 0.0);
    if (mx > 0)
        for (std::size_t ni = 0; ni < n; ++ni) out.scores[ni] = out.raw[ni] / mx;
    return out;
}

// Indices of the ceil(fraction * N) highest scores, sorted by descending
// score with ties broken toward the lower index. Throws ConfigError when
// fraction is outside (0, 1].
std::vector<std::size_t> topk_tracks(const std::vector<double>& scores, double fraction);

struct HistogramResult {
    std::vector<std::size_t> counts;     // one per bin, uniform over [0, 1]
    std::vector<double> bin_low;         // inclusive lower edges
    std::vector<double> bin_high;        // upper edges; last bin includes 1.0
    double mean_above_half = 0;          // mean per-video count of scores > 0.5
};

// Bin rule: a score on a boundary goes to the lower bin, except 1.0 which
// goes to the top bin; scores <= 0 land in bin 0.
HistogramResult importance_histogram(const std::vector<ImportanceScores>& sets, std::size_t bins);

// Columns: video_id, track_index, score.
void save_scores_csv(const std::string& path, const std::vector<ImportanceScores>& sets);
// Columns: bin_low, bin_high, count.
void save_histogram_csv(const std::string& path, const HistogramResult& h);

}  // namespace movt::saliency
