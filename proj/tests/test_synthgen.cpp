#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "movt/frames.hpp"
#include "movt/manifest.hpp"
#include "movt/synthgen.hpp"
#include "movt/trackio.hpp"
#include "support/test_util.hpp"

using namespace movt;
namespace fs = std::filesystem;

namespace {

synthgen::GenConfig clean_config(const std::string& family_a = "swipe_left",
                                 const std::string& family_b = "swipe_right") {
    synthgen::GenConfig cfg;
    cfg.families = {family_a, family_b};
    cfg.train_per_class = 3;
    cfg.val_per_class = 1;
    cfg.test_per_class = 1;
    cfg.frames = 16;
    cfg.tracks = 8;
    cfg.noise_sigma = 0.0;
    cfg.occlusion_rate = 0.0;
    cfg.speed_jitter = 0.0;
    return cfg;
}

std::size_t family_index(const synthgen::GenConfig& cfg, const std::string& name) {
    for (std::size_t i = 0; i < cfg.families.size(); ++i)
        if (cfg.families[i] == name) return i;
    FAIL(("family not in config: " + name));
    return 0;
}

trackio::PointTrackSet noiseless_sample(const std::string& family, std::uint64_t seed,
                                        std::size_t frames = 16, std::size_t tracks = 8) {
    synthgen::GenConfig cfg;
    cfg.families = synthgen::kAllFamilies;
    cfg.frames = frames;
    cfg.tracks = tracks;
    cfg.noise_sigma = 0.0;
    cfg.occlusion_rate = 0.0;
    cfg.speed_jitter = 0.0;
    return synthgen::make_sample(cfg, family_index(cfg, family), "t", seed);
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config validation rejects each bad field") {
    auto ok = clean_config();
    CHECK_NOTHROW(ok.validate());

    auto c = ok;
    c.families = {"swipe_left"};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.families = {"swipe_left", "wiggle"};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.families = {"swipe_left", "swipe_left"};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.train_per_class = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.frames = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.tracks = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.noise_sigma = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.occlusion_rate = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.speed_jitter = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.render = true;
    c.image_h = 8;
    c.image_w = 8;
    c.blob_sigma = 1.5;  // 6 sigma = 9 does not fit in 8 pixels
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("swipes move the right way at constant velocity") {
    struct Case {
        const char* family;
        int axis;  // 0 = x, 1 = y
        double sign;
    };
    for (const Case& cs : {Case{"swipe_left", 0, -1.0}, Case{"swipe_right", 0, 1.0},
                           Case{"swipe_up", 1, -1.0}, Case{"swipe_down", 1, 1.0}}) {
        const auto set = noiseless_sample(cs.family, 42);
        const trackio::VelocityTensor vel = trackio::compute_velocity(set);
        const double step = 0.25 / static_cast<double>(set.frames - 1);
        for (std::size_t n = 0; n < set.tracks; ++n) {
            for (std::size_t t = 1; t < set.frames; ++t) {
                const double moving = vel.values[(n * set.frames + t) * 3 + cs.axis];
                const double fixed = vel.values[(n * set.frames + t) * 3 + (1 - cs.axis)];
                CHECK(moving * cs.sign > 0);
                CHECK(std::abs(moving - cs.sign * step) < 1e-6);
                CHECK(std::abs(fixed) < 1e-6);
            }
            // Total displacement along the moving axis is 0.25 at unit speed.
            const double t0 = cs.axis == 0 ? set.x(0, n) : set.y(0, n);
            const double tN = cs.axis == 0 ? set.x(set.frames - 1, n) : set.y(set.frames - 1, n);
            CHECK(std::abs((tN - t0) - cs.sign * 0.25) < 1e-5);
        }
    }
}

TEST_CASE("circles keep every point at fixed distance from the start centroid") {
    for (const char* family : {"circle_cw", "circle_ccw"}) {
        const auto set = noiseless_sample(family, 7);
        double cx = 0, cy = 0;
        for (std::size_t n = 0; n < set.tracks; ++n) {
            cx += set.x(0, n);
            cy += set.y(0, n);
        }
        cx /= static_cast<double>(set.tracks);
        cy /= static_cast<double>(set.tracks);
        for (std::size_t n = 0; n < set.tracks; ++n) {
            const double r0 = std::hypot(set.x(0, n) - cx, set.y(0, n) - cy);
            for (std::size_t t = 1; t < set.frames; ++t) {
                const double rt = std::hypot(set.x(t, n) - cx, set.y(t, n) - cy);
                CHECK(std::abs(rt - r0) < 1e-6);
            }
        }
    }
}

TEST_CASE("rotation direction is opposite for the two circle families") {
    for (const char* family : {"circle_cw", "circle_ccw"}) {
        const auto set = noiseless_sample(family, 19);
        const double expect = std::string(family) == "circle_cw" ? 1.0 : -1.0;
        double cx = 0, cy = 0;
        for (std::size_t n = 0; n < set.tracks; ++n) {
            cx += set.x(0, n);
            cy += set.y(0, n);
        }
        cx /= static_cast<double>(set.tracks);
        cy /= static_cast<double>(set.tracks);
        for (std::size_t n = 0; n < set.tracks; ++n) {
            for (std::size_t t = 1; t < set.frames; ++t) {
                const double ax = set.x(t - 1, n) - cx, ay = set.y(t - 1, n) - cy;
                const double bx = set.x(t, n) - cx, by = set.y(t, n) - cy;
                const double cross = ax * by - ay * bx;  // positive = clockwise on screen
                CHECK(cross * expect > 0);
            }
        }
    }
}

TEST_CASE("zooms scale distances monotonically") {
    for (const char* family : {"zoom_in", "zoom_out"}) {
        const auto set = noiseless_sample(family, 23);
        const bool growing = std::string(family) == "zoom_in";
        double cx = 0, cy = 0;
        for (std::size_t n = 0; n < set.tracks; ++n) {
            cx += set.x(0, n);
            cy += set.y(0, n);
        }
        cx /= static_cast<double>(set.tracks);
        cy /= static_cast<double>(set.tracks);
        double prev = -1;
        for (std::size_t t = 0; t < set.frames; ++t) {
            double mean_r = 0;
            for (std::size_t n = 0; n < set.tracks; ++n)
                mean_r += std::hypot(set.x(t, n) - cx, set.y(t, n) - cy);
            mean_r /= static_cast<double>(set.tracks);
            if (t > 0) CHECK((growing ? mean_r > prev : mean_r < prev));
            prev = mean_r;
        }
        // Total radial factor is 1.8^(+/-1) at unit speed.
        double r_first = 0, r_last = 0;
        for (std::size_t n = 0; n < set.tracks; ++n) {
            r_first += std::hypot(set.x(0, n) - cx, set.y(0, n) - cy);
            r_last += std::hypot(set.x(set.frames - 1, n) - cx, set.y(set.frames - 1, n) - cy);
        }
        const double factor = r_last / r_first;
        CHECK(std::abs(factor - (growing ? 1.8 : 1.0 / 1.8)) < 1e-4);
    }
}

TEST_CASE("samples stay inside the unit square even at maximum jitter") {
    synthgen::GenConfig cfg;
    cfg.frames = 32;
    cfg.tracks = 20;
    cfg.noise_sigma = 0.005;
    cfg.occlusion_rate = 0.05;
    cfg.speed_jitter = 0.3;
    for (std::size_t fam = 0; fam < cfg.families.size(); ++fam) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto set = synthgen::make_sample(cfg, fam, "b", seed * 31 + fam);
            for (float p : set.positions) {
                CHECK(p >= 0.0f);
                CHECK(p <= 1.0f);
            }
        }
    }
}

TEST_CASE("make_sample is deterministic in the seed") {
    synthgen::GenConfig cfg;
    cfg.noise_sigma = 0.01;
    cfg.occlusion_rate = 0.1;
    cfg.frames = 16;
    cfg.tracks = 10;
    const auto a = synthgen::make_sample(cfg, 4, "v", 99);
    const auto b = synthgen::make_sample(cfg, 4, "v", 99);
    CHECK(a == b);
    const auto c = synthgen::make_sample(cfg, 4, "v", 100);
    CHECK(a.positions != c.positions);
}

TEST_CASE("occlusion rate zero flags nothing") {
    const auto set = noiseless_sample("circle_cw", 3);
    for (auto o : set.occlusion) CHECK(o == 0);
}

TEST_CASE("occlusion spans are contiguous, short, and hit the configured rate") {
    synthgen::GenConfig cfg;
    cfg.frames = 32;
    cfg.tracks = 60;
    cfg.noise_sigma = 0.0;
    cfg.occlusion_rate = 0.05;
    cfg.speed_jitter = 0.0;
    const std::size_t max_len = cfg.frames / 8;

    std::size_t flagged = 0, cells = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto set = synthgen::make_sample(cfg, seed % 8, "o", 1000 + seed);
        for (std::size_t n = 0; n < set.tracks; ++n) {
            std::size_t count = 0, first = set.frames, last = 0;
            for (std::size_t t = 0; t < set.frames; ++t) {
                if (!set.occluded(t, n)) continue;
                ++count;
                first = std::min(first, t);
                last = t;
            }
            if (count > 0) {
                CHECK(count <= max_len);
                CHECK(last - first + 1 == count);  // a single contiguous span
            }
            flagged += count;
            cells += set.frames;
        }
    }
    const double rate = static_cast<double>(flagged) / static_cast<double>(cells);
    CHECK(rate > 0.040);
    CHECK(rate < 0.060);
}

TEST_CASE("generate_dataset writes a balanced, loadable corpus") {
    testutil::TempDir dir("gen");
    auto cfg = clean_config("circle_cw", "zoom_out");
    cfg.seed = 5;
    const auto summary = synthgen::generate_dataset(cfg, dir.str());
    CHECK(summary.samples == 10);
    CHECK(summary.classes == 2);
    CHECK(summary.train == 6);
    CHECK(summary.val == 2);
    CHECK(summary.test == 2);

    const auto entries = trackio::load_manifest(summary.manifest_path);
    REQUIRE(entries.size() == 10);
    std::map<std::uint32_t, std::size_t> per_class;
    std::set<std::string> ids;
    for (const auto& e : entries) {
        ++per_class[e.class_label];
        CHECK(ids.insert(e.video_id).second);  // ids are unique
        const auto set = trackio::load_tracks((fs::path(dir.str()) / e.file).string());
        CHECK(set.tracks == cfg.tracks);
        CHECK(set.frames == cfg.frames);
        CHECK(set.class_label == e.class_label);
        CHECK(set.video_id == e.video_id);
        CHECK(set.normalized);
    }
    CHECK(per_class[0] == 5);
    CHECK(per_class[1] == 5);
    CHECK(entries[0].video_id == "circle_cw_train_0000");
}

TEST_CASE("same seed regenerates byte-identical datasets") {
    testutil::TempDir dir("gen_det");
    auto cfg = clean_config();
    cfg.train_per_class = 1;
    cfg.frames = 8;
    cfg.tracks = 3;
    cfg.noise_sigma = 0.004;
    cfg.occlusion_rate = 0.1;
    cfg.speed_jitter = 0.2;
    cfg.seed = 77;
    cfg.render = true;
    cfg.image_h = 16;
    cfg.image_w = 16;
    cfg.blob_sigma = 1.0;

    const std::string da = dir.file("a"), db = dir.file("b");
    synthgen::generate_dataset(cfg, da);
    synthgen::generate_dataset(cfg, db);

    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(da)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto rel = fs::relative(entry.path(), da);
        CHECK(read_bytes(entry.path()) == read_bytes(fs::path(db) / rel));
    }
    // 2 families x 3 splits x 1 sample = 6 clips, each .ptrk + .frms, + manifest.
    CHECK(files == 13);

    auto other = cfg;
    other.seed = 78;
    const std::string dc = dir.file("c");
    synthgen::generate_dataset(other, dc);
    const fs::path probe = fs::path("tracks") / "swipe_left_train_0000.ptrk";
    CHECK(read_bytes(fs::path(da) / probe) != read_bytes(fs::path(dc) / probe));
}

TEST_CASE("rendered blobs peak at the point and integrate to 2 pi sigma^2") {
    trackio::PointTrackSet set;
    set.video_id = "r";
    set.frames = 2;
    set.tracks = 1;
    set.positions = {0.5f, 0.5f, 0.5f, 0.5f};
    set.occlusion = {0, 0};
    set.normalized = true;
    set.validate();

    const double sigma = 1.5;
    const auto vol = synthgen::render_frames(set, 65, 65, sigma);
    CHECK(vol.frames == 2);
    CHECK(vol.height == 65);
    CHECK(vol.width == 65);

    // x = 0.5 lands exactly on pixel 32 of 65, so the peak is exp(0) = 1.
    CHECK(vol.at(0, 32, 32, 0) == doctest::Approx(1.0));
    double sum = 0;
    float peak = 0;
    for (std::size_t y = 0; y < 65; ++y) {
        for (std::size_t x = 0; x < 65; ++x) {
            sum += vol.at(0, y, x, 0);
            peak = std::max(peak, vol.at(0, y, x, 0));
            CHECK(vol.at(0, y, x, 1) == vol.at(0, y, x, 0));
            CHECK(vol.at(0, y, x, 2) == vol.at(0, y, x, 0));
        }
    }
    CHECK(peak == doctest::Approx(1.0));
    const double expect = 2.0 * std::acos(-1.0) * sigma * sigma;
    CHECK(std::abs(sum - expect) / expect < 0.02);
}

TEST_CASE("occluded points do not render and overlaps clamp to one") {
    trackio::PointTrackSet set;
    set.video_id = "r2";
    set.frames = 2;
    set.tracks = 5;
    set.positions.assign(2 * 5 * 2, 0.5f);
    set.occlusion.assign(2 * 5, 0);
    for (std::size_t n = 0; n < 5; ++n) set.occlusion[0 * 5 + n] = 1;  // frame 0 fully hidden
    set.normalized = true;
    set.validate();

    const auto vol = synthgen::render_frames(set, 33, 33, 1.5);
    for (std::size_t y = 0; y < 33; ++y)
        for (std::size_t x = 0; x < 33; ++x) CHECK(vol.at(0, y, x, 0) == 0.0f);
    // Five coincident unit-peak blobs sum to 5 and clamp to exactly 1.
    CHECK(vol.at(1, 16, 16, 0) == 1.0f);
}

TEST_CASE("render_frames input validation") {
    trackio::PointTrackSet set;
    set.video_id = "r3";
    set.frames = 2;
    set.tracks = 1;
    set.positions = {0.5f, 0.5f, 0.5f, 0.5f};
    set.occlusion = {0, 0};
    set.normalized = true;

    CHECK_THROWS_AS(synthgen::render_frames(set, 8, 8, 1.5), ConfigError);
    CHECK_THROWS_AS(synthgen::render_frames(set, 32, 32, 0.0), ConfigError);
    auto raw = set;
    raw.normalized = false;
    CHECK_THROWS_AS(synthgen::render_frames(raw, 32, 32, 1.5), DataError);
}

TEST_CASE("frame volumes round trip and reject corruption") {
    testutil::TempDir dir("frms");
    frames::FrameVolume vol;
    vol.frames = 3;
    vol.height = 4;
    vol.width = 5;
    vol.values.resize(vol.expected_size());
    Rng rng(8);
    for (auto& v : vol.values) v = static_cast<float>(rng.uniform(0.0, 1.0));

    const std::string path = dir.file("v.frms");
    frames::save_frames(vol, path);
    const auto back = frames::load_frames(path);
    CHECK(back.frames == 3);
    CHECK(back.height == 4);
    CHECK(back.width == 5);
    CHECK(testutil::bitwise_equal(back.values, vol.values));

    auto bytes = read_bytes(path);
    {
        auto bad = bytes;
        bad[0] = 'X';
        std::ofstream out(dir.file("magic.frms"), std::ios::binary);
        out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    }
    CHECK_THROWS_AS(frames::load_frames(dir.file("magic.frms")), DataError);
    {
        std::ofstream out(dir.file("trunc.frms"), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
    }
    CHECK_THROWS_AS(frames::load_frames(dir.file("trunc.frms")), DataError);
    {
        auto bad = bytes;
        bad.push_back('\0');
        std::ofstream out(dir.file("trail.frms"), std::ios::binary);
        out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    }
    CHECK_THROWS_AS(frames::load_frames(dir.file("trail.frms")), DataError);
    CHECK_THROWS_AS(frames::load_frames(dir.file("missing.frms")), IoError);
}
