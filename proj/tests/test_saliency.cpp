#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "doctest.h"
#include "movt/csvio.hpp"
#include "movt/model.hpp"
#include "movt/rng.hpp"
#include "movt/saliency.hpp"
#include "movt/trackio.hpp"
#include "support/test_util.hpp"

using namespace movt;

namespace {

trackio::PointTrackSet random_set(std::size_t tracks, std::size_t frames, std::uint64_t seed,
                                  std::uint32_t label = 0) {
    trackio::PointTrackSet set;
    set.video_id = "clip" + std::to_string(seed);
    set.tracks = tracks;
    set.frames = frames;
    set.positions.resize(frames * tracks * 2);
    set.occlusion.assign(frames * tracks, 0);
    set.normalized = true;
    set.label_kind = trackio::LabelKind::class_index;
    set.class_label = label;
    Rng rng(seed);
    for (auto& p : set.positions) p = static_cast<float>(rng.uniform(0.05, 0.95));
    set.occlusion[1 * tracks + 0] = 1;  // one occluded sample to exercise channel 2
    set.validate();
    return set;
}

model::MovTConfig tiny_config() {
    model::MovTConfig cfg;
    cfg.embed_dim = 4;
    cfg.conv_kernel = 3;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.ff_expansion = 2;
    cfg.mlp_depth = 2;
    cfg.dropout = 0.0;
    cfg.head = model::HeadKind::classification;
    cfg.classes = 3;
    return cfg;
}

// Fresh init leaves biases at exactly zero, which parks the zero t = 0
// velocity rows on the ReLU kink where central differences and the
// subgradient disagree. Jitter every parameter so the check runs at a
// differentiable point, as any trained model would.
void jitter_params(model::MovTModel<double>& m, std::uint64_t seed) {
    Rng rng(seed);
    for (auto* p : m.parameters())
        for (auto& w : p->value.data) w += rng.uniform(-0.05, 0.05);
}

// Central-difference per-track gradient norms against the model logit,
// perturbing the derived velocity/means tensors directly.
void fd_track_norms(const model::MovTModel<double>& m, const trackio::PointTrackSet& set,
                    std::size_t label, bool grad_x_input, std::vector<double>* out) {
    const trackio::VelocityTensor vel = trackio::compute_velocity(set);
    const std::vector<float> means = trackio::mean_position(set);
    const std::size_t n = set.tracks, t = set.frames;
    nn::Tensor<double> v({1, n, t, 3});
    for (std::size_t i = 0; i < vel.values.size(); ++i) v.data[i] = vel.values[i];
    nn::Tensor<double> mp({1, n, 2});
    for (std::size_t i = 0; i < means.size(); ++i) mp.data[i] = means[i];

    auto logit = [&](const nn::Tensor<double>& vv, const nn::Tensor<double>& mm) {
        return m.forward(vv, mm, nullptr, nullptr).output.data[label];
    };
    const double eps = 1e-6;
    out->assign(n, 0.0);
    for (std::size_t ni = 0; ni < n; ++ni) {
        double sq = 0;
        for (std::size_t ti = 0; ti < t; ++ti) {
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t idx = (ni * t + ti) * 3 + c;
                nn::Tensor<double> vp = v, vm = v;
                vp.data[idx] += eps;
                vm.data[idx] -= eps;
                double g = (logit(vp, mp) - logit(vm, mp)) / (2 * eps);
                if (grad_x_input) g *= v.data[idx];
                sq += g * g;
            }
        }
        for (std::size_t c = 0; c < 2; ++c) {
            const std::size_t idx = ni * 2 + c;
            nn::Tensor<double> pp = mp, pm = mp;
            pp.data[idx] += eps;
            pm.data[idx] -= eps;
            double g = (logit(v, pp) - logit(v, pm)) / (2 * eps);
            if (grad_x_input) g *= mp.data[idx];
            sq += g * g;
        }
        (*out)[ni] = std::sqrt(sq);
    }
}

}  // namespace

TEST_CASE("raw scores match finite differences in double precision") {
    auto cfg = tiny_config();
    model::MovTModel<double> m(cfg);
    m.init(11);
    jitter_params(m, 17);
    const auto set = random_set(3, 5, 21, 1);

    for (bool gxi : {false, true}) {
        const auto got = saliency::track_importance(m, set, 1, gxi);
        std::vector<double> want;
        fd_track_norms(m, set, 1, gxi, &want);
        REQUIRE(got.raw.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            const double denom = std::max(std::abs(want[i]), 1e-12);
            CHECK(std::abs(got.raw[i] - want[i]) / denom < 1e-4);
        }
    }
}

TEST_CASE("scores are raw over max with maximum exactly one") {
    model::MovTModel<double> m(tiny_config());
    m.init(3);
    const auto set = random_set(6, 7, 5, 2);
    const auto out = saliency::track_importance(m, set, 2);
    REQUIRE(out.scores.size() == 6);
    CHECK(out.video_id == set.video_id);
    const double mx = *std::max_element(out.raw.begin(), out.raw.end());
    CHECK(mx > 0);
    CHECK(*std::max_element(out.scores.begin(), out.scores.end()) == 1.0);
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(out.scores[i] == doctest::Approx(out.raw[i] / mx).epsilon(1e-15));
}

TEST_CASE("all-zero parameters give all-zero scores") {
    model::MovTModel<double> m(tiny_config());
    m.init(4);
    for (auto* p : m.parameters())
        std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
    const auto set = random_set(4, 6, 9);
    const auto out = saliency::track_importance(m, set, 0);
    for (double r : out.raw) CHECK(r == 0.0);
    for (double s : out.scores) CHECK(s == 0.0);
}

TEST_CASE("identical tracks receive identical scores") {
    model::MovTModel<double> m(tiny_config());
    m.init(8);
    auto set = random_set(4, 6, 13);
    for (std::size_t t = 0; t < set.frames; ++t) {
        set.x(t, 2) = set.x(t, 0);
        set.y(t, 2) = set.y(t, 0);
        set.occlusion[t * set.tracks + 2] = set.occlusion[t * set.tracks + 0];
    }
    const auto out = saliency::track_importance(m, set, 0);
    CHECK(out.raw[0] == out.raw[2]);
    CHECK(out.scores[0] == out.scores[2]);
    CHECK(out.raw[0] != out.raw[1]);
}

TEST_CASE("scores follow tracks under permutation") {
    model::MovTModel<double> m(tiny_config());
    m.init(15);
    const auto set = random_set(5, 6, 17);
    const std::vector<std::size_t> perm{3, 0, 4, 1, 2};  // permuted[j] = original[perm[j]]
    trackio::PointTrackSet shuffled = set;
    for (std::size_t t = 0; t < set.frames; ++t) {
        for (std::size_t j = 0; j < set.tracks; ++j) {
            shuffled.x(t, j) = set.x(t, perm[j]);
            shuffled.y(t, j) = set.y(t, perm[j]);
            shuffled.occlusion[t * set.tracks + j] = set.occlusion[t * set.tracks + perm[j]];
        }
    }
    const auto a = saliency::track_importance(m, set, 0);
    const auto b = saliency::track_importance(m, shuffled, 0);
    for (std::size_t j = 0; j < set.tracks; ++j) {
        const double denom = std::max(std::abs(a.raw[perm[j]]), 1e-12);
        CHECK(std::abs(b.raw[j] - a.raw[perm[j]]) / denom < 1e-9);
    }
}

TEST_CASE("track_importance input validation") {
    auto cfg = tiny_config();
    model::MovTModel<double> m(cfg);
    m.init(1);
    auto set = random_set(3, 5, 2);
    CHECK_THROWS_AS(saliency::track_importance(m, set, 3), DataError);

    auto raw_set = set;
    raw_set.normalized = false;
    raw_set.width = 64;
    raw_set.height = 64;
    for (auto& p : raw_set.positions) p *= 64.0f;
    CHECK_THROWS_AS(saliency::track_importance(m, raw_set, 0), DataError);

    cfg.head = model::HeadKind::regression;
    cfg.output_dim = 2;
    model::MovTModel<double> reg(cfg);
    reg.init(1);
    CHECK_THROWS_AS(saliency::track_importance(reg, set, 0), ConfigError);
}

TEST_CASE("topk_tracks selects the highest scores with stable ties") {
    const std::vector<double> scores{0.2, 0.9, 0.9, 0.1, 0.5, 0.9};

    auto top1 = saliency::topk_tracks(scores, 1e-9);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0] == 1);  // tie at 0.9 broken toward the lower index

    auto top3 = saliency::topk_tracks(scores, 0.5);
    CHECK(top3 == std::vector<std::size_t>{1, 2, 5});

    auto all = saliency::topk_tracks(scores, 1.0);
    CHECK(all == std::vector<std::size_t>{1, 2, 5, 4, 0, 3});
}

TEST_CASE("topk_tracks property oracle on random scores") {
    Rng rng(77);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 1 + rng.next_below(40);
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.next_below(10) / 10.0;  // force ties
        const double fraction = rng.uniform(0.05, 1.0);
        const auto sel = saliency::topk_tracks(scores, fraction);

        const std::size_t k =
            static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
        REQUIRE(sel.size() == k);

        // Output ordering: score descending, index ascending on ties.
        for (std::size_t i = 1; i < sel.size(); ++i) {
            const bool ordered = scores[sel[i - 1]] > scores[sel[i]] ||
                                 (scores[sel[i - 1]] == scores[sel[i]] && sel[i - 1] < sel[i]);
            CHECK(ordered);
        }

        // No excluded index may dominate an included one.
        std::vector<bool> in(n, false);
        for (auto idx : sel) in[idx] = true;
        for (std::size_t out = 0; out < n; ++out) {
            if (in[out]) continue;
            for (auto inc : sel) {
                const bool dominated = scores[out] < scores[inc] ||
                                       (scores[out] == scores[inc] && out > inc);
                CHECK(dominated);
            }
        }
    }
}

TEST_CASE("topk prefixes nest as the fraction grows") {
    Rng rng(78);
    std::vector<double> scores(23);
    for (auto& s : scores) s = rng.uniform(0.0, 1.0);
    const auto small = saliency::topk_tracks(scores, 0.2);
    const auto big = saliency::topk_tracks(scores, 0.7);
    REQUIRE(small.size() <= big.size());
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == big[i]);
}

TEST_CASE("topk_tracks error cases") {
    std::vector<double> scores{0.5, 0.2};
    CHECK_THROWS_AS(saliency::topk_tracks(scores, 0.0), ConfigError);
    CHECK_THROWS_AS(saliency::topk_tracks(scores, 1.5), ConfigError);
    CHECK_THROWS_AS(saliency::topk_tracks(scores, -0.2), ConfigError);
    CHECK_THROWS_AS(saliency::topk_tracks({}, 0.5), DataError);
}

TEST_CASE("histogram boundary rule on the worked example") {
    saliency::ImportanceScores s;
    s.video_id = "v";
    s.scores = {0.0, 0.5, 1.0};
    const auto h = saliency::importance_histogram({s}, 2);
    REQUIRE(h.counts.size() == 2);
    CHECK(h.counts[0] == 2);  // 0 and the 0.5 boundary fall low
    CHECK(h.counts[1] == 1);
    CHECK(h.bin_low[0] == 0.0);
    CHECK(h.bin_high[1] == doctest::Approx(1.0));
}

TEST_CASE("histogram random counting oracle") {
    Rng rng(99);
    for (std::size_t bins : {1ul, 3ul, 7ul, 10ul}) {
        std::vector<saliency::ImportanceScores> sets(4);
        std::size_t total = 0;
        for (auto& s : sets) {
            s.scores.resize(1 + rng.next_below(30));
            for (auto& v : s.scores) v = rng.uniform(0.0, 1.0);
            s.scores.push_back(0.0);
            s.scores.push_back(1.0);
            total += s.scores.size();
        }
        const auto h = saliency::importance_histogram(sets, bins);
        REQUIRE(h.counts.size() == bins);

        // Independent edge scan: first bin whose upper edge reaches the score.
        std::vector<std::size_t> want(bins, 0);
        for (const auto& s : sets) {
            for (double v : s.scores) {
                std::size_t bin = bins - 1;
                if (v <= 0) {
                    bin = 0;
                } else {
                    for (std::size_t i = 0; i < bins; ++i) {
                        if (v <= static_cast<double>(i + 1) / static_cast<double>(bins)) {
                            bin = i;
                            break;
                        }
                    }
                }
                ++want[bin];
            }
        }
        std::size_t sum = 0;
        for (std::size_t i = 0; i < bins; ++i) {
            CHECK(h.counts[i] == want[i]);
            sum += h.counts[i];
        }
        CHECK(sum == total);
    }
}

TEST_CASE("histogram mean_above_half averages per-video counts") {
    saliency::ImportanceScores a, b;
    a.scores = {0.6, 0.2};
    b.scores = {0.9, 0.55, 0.1};
    const auto h = saliency::importance_histogram({a, b}, 4);
    CHECK(h.mean_above_half == doctest::Approx(1.5));
    CHECK_THROWS_AS(saliency::importance_histogram({a}, 0), ConfigError);
}

TEST_CASE("saliency csv writers produce the documented columns") {
    testutil::TempDir dir("saliency");
    saliency::ImportanceScores a, b;
    a.video_id = "va";
    a.scores = {1.0, 0.25};
    b.video_id = "vb";
    b.scores = {0.5};
    const std::string spath = dir.file("scores.csv");
    saliency::save_scores_csv(spath, {a, b});
    const auto table = csvio::load_rows(spath);
    CHECK(table.header == std::vector<std::string>{"video_id", "track_index", "score"});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0][0] == "va");
    CHECK(table.rows[2][0] == "vb");
    CHECK(csvio::parse_double(table.rows[1][2], "score") == doctest::Approx(0.25));

    const auto h = saliency::importance_histogram({a, b}, 4);
    const std::string hpath = dir.file("hist.csv");
    saliency::save_histogram_csv(hpath, h);
    const auto htable = csvio::load_rows(hpath);
    CHECK(htable.header == std::vector<std::string>{"bin_low", "bin_high", "count"});
    CHECK(htable.rows.size() == 4);
}
