#include "movt/saliency.hpp"

#include "movt/csvio.hpp"

namespace movt::saliency {

std::vector<std::size_t> topk_tracks(const std::vector<double>& scores, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("top-fraction must lie in (0,1], got " + std::to_string(fraction));
    if (scores.empty()) throw DataError("no scores to rank");
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(scores.size())));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    order.resize(k);
    return order;
}

HistogramResult importance_histogram(const std::vector<ImportanceScores>& sets,
                                     std::size_t bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    HistogramResult h;
    h.counts.assign(bins, 0);
    h.bin_low.resize(bins);
    h.bin_high.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h.bin_low[b] = static_cast<double>(b) / static_cast<double>(bins);
        h.bin_high[b] = static_cast<double>(b + 1) / static_cast<double>(bins);
    }
    double above_sum = 0;
    for (const auto& s : sets) {
        std::size_t above = 0;
        for (double v : s.scores) {
            // Boundary values fall into the lower bin; 0 has no lower bin and
            // stays in bin 0, and the clamp keeps 1.0 in the top bin.
            std::size_t idx = 0;
            if (v > 0) {
                const double scaled = v * static_cast<double>(bins);
                idx = static_cast<std::size_t>(std::ceil(scaled)) - 1;
                if (idx >= bins) idx = bins - 1;
            }
            ++h.counts[idx];
            above += v > 0.5;
        }
        above_sum += static_cast<double>(above);
    }
    h.mean_above_half = sets.empty() ? 0.0 : above_sum / static_cast<double>(sets.size());
    return h;
}

void save_scores_csv(const std::string& path, const std::vector<ImportanceScores>& sets) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : sets)
        for (std::size_t i = 0; i < s.scores.size(); ++i)
            rows.push_back({s.video_id, std::to_string(i), csvio::num9(s.scores[i])});
    csvio::save_rows(path, {"video_id", "track_index", "score"}, rows);
}

void save_histogram_csv(const std::string& path, const HistogramResult& h) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        rows.push_back({csvio::num9(h.bin_low[b]), csvio::num9(h.bin_high[b]),
                        std::to_string(h.counts[b])});
    csvio::save_rows(path, {"bin_low", "bin_high", "count"}, rows);
}

}  // namespace movt::saliency
