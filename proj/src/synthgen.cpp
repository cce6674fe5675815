#include "movt/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>

#include "movt/manifest.hpp"
#include "movt/rng.hpp"

namespace movt::synthgen {

const std::vector<std::string> kAllFamilies = {
    "swipe_left", "swipe_right", "swipe_up",  "swipe_down",
    "circle_cw",  "circle_ccw",  "zoom_in",   "zoom_out",
};

namespace {

// Geometry constants, normalized units. The initial box plus the worst-case
// swipe travel (0.25 * (1 + jitter)) must stay inside [0, 1].
constexpr double kBoxLo = 0.35;
constexpr double kBoxHi = 0.65;
constexpr double kSwipeTravel = 0.25;   // total displacement at speed 1
constexpr double kTurnTotal = std::numbers::pi;  // radians at speed 1
constexpr double kZoomTotal = 1.8;      // total radial factor at speed 1

enum class Family {
    swipe_left,
    swipe_right,
    swipe_up,
    swipe_down,
    circle_cw,
    circle_ccw,
    zoom_in,
    zoom_out,
};

Family parse_family(const std::string& name) {
    for (std::size_t i = 0; i < kAllFamilies.size(); ++i)
        if (kAllFamilies[i] == name) return static_cast<Family>(i);
    throw ConfigError("unknown motion family: '" + name + "'");
}

}  // namespace

void GenConfig::validate() const {
    if (families.size() < 2) throw ConfigError("need at least two motion families");
    std::set<std::string> seen;
    for (const auto& f : families) {
        parse_family(f);
        if (!seen.insert(f).second) throw ConfigError("duplicate motion family: '" + f + "'");
    }
    if (train_per_class < 1 || val_per_class < 1 || test_per_class < 1)
        throw ConfigError("per-class counts must be at least 1");
    if (frames < 2) throw ConfigError("need at least 2 frames");
    if (tracks < 1) throw ConfigError("need at least 1 track");
    if (noise_sigma < 0) throw ConfigError("noise sigma must be non-negative");
    if (!(occlusion_rate >= 0 && occlusion_rate < 1))
        throw ConfigError("occlusion rate must lie in [0, 1)");
    if (!(speed_jitter >= 0 && speed_jitter < 1))
        throw ConfigError("speed jitter must lie in [0, 1)");
    if (render) {
        if (image_h < 1 || image_w < 1) throw ConfigError("render resolution must be positive");
        if (blob_sigma <= 0) throw ConfigError("blob sigma must be positive");
        if (6.0 * blob_sigma > static_cast<double>(std::min(image_h, image_w)))
            throw ConfigError("render resolution too small for blob sigma " +
                              std::to_string(blob_sigma));
    }
}

trackio::PointTrackSet make_sample(const GenConfig& cfg, std::size_t family_index,
                                   const std::string& video_id, std::uint64_t sample_seed) {
    if (family_index >= cfg.families.size())
        throw ConfigError("family index out of range: " + std::to_string(family_index));
    const Family family = parse_family(cfg.families[family_index]);
    const std::size_t t_n = cfg.frames, n = cfg.tracks;

    const Rng root(sample_seed);
    Rng geo = root.derive(0);
    Rng occ = root.derive(1);
    Rng noise = root.derive(2);

    // Base points and centroid, in double for stable geometry.
    std::vector<double> base(n * 2);
    double cx = 0, cy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        base[i * 2] = geo.uniform(kBoxLo, kBoxHi);
        base[i * 2 + 1] = geo.uniform(kBoxLo, kBoxHi);
        cx += base[i * 2];
        cy += base[i * 2 + 1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    const double speed = 1.0 + geo.uniform(-cfg.speed_jitter, cfg.speed_jitter);
    const double steps = static_cast<double>(t_n - 1);

    trackio::PointTrackSet set;
    set.video_id = video_id;
    set.frames = t_n;
    set.tracks = n;
    set.positions.resize(t_n * n * 2);
    set.occlusion.assign(t_n * n, 0);
    set.normalized = true;
    set.label_kind = trackio::LabelKind::class_index;
    set.class_label = static_cast<std::uint32_t>(family_index);

    for (std::size_t ti = 0; ti < t_n; ++ti) {
        const double u = static_cast<double>(ti);
        double dx = 0, dy = 0;          // swipe displacement at frame ti
        double rot = 0;                 // rotation angle at frame ti
        double scale = 1;               // radial factor at frame ti
        switch (family) {
            case Family::swipe_left: dx = -kSwipeTravel * speed * u / steps; break;
            case Family::swipe_right: dx = kSwipeTravel * speed * u / steps; break;
            case Family::swipe_up: dy = -kSwipeTravel * speed * u / steps; break;
            case Family::swipe_down: dy = kSwipeTravel * speed * u / steps; break;
            // y grows downward, so a positive angle reads clockwise on screen.
            case Family::circle_cw: rot = kTurnTotal * speed * u / steps; break;
            case Family::circle_ccw: rot = -kTurnTotal * speed * u / steps; break;
            case Family::zoom_in: scale = std::pow(kZoomTotal, speed * u / steps); break;
            case Family::zoom_out: scale = std::pow(kZoomTotal, -speed * u / steps); break;
        }
        const double cr = std::cos(rot), sr = std::sin(rot);
        for (std::size_t ni = 0; ni < n; ++ni) {
            const double ox = base[ni * 2] - cx;
            const double oy = base[ni * 2 + 1] - cy;
            double px, py;
            switch (family) {
                case Family::circle_cw:
                case Family::circle_ccw:
                    px = cx + cr * ox - sr * oy;
                    py = cy + sr * ox + cr * oy;
                    break;
                case Family::zoom_in:
                case Family::zoom_out:
                    px = cx + scale * ox;
                    py = cy + scale * oy;
                    break;
                default:
                    px = base[ni * 2] + dx;
                    py = base[ni * 2 + 1] + dy;
                    break;
            }
            if (cfg.noise_sigma > 0) {
                px += noise.normal(0.0, cfg.noise_sigma);
                py += noise.normal(0.0, cfg.noise_sigma);
            }
            set.x(ti, ni) = static_cast<float>(std::clamp(px, 0.0, 1.0));
            set.y(ti, ni) = static_cast<float>(std::clamp(py, 0.0, 1.0));
        }
    }

    // One occlusion span per selected track. Span lengths are uniform on
    // [1, max(1, frames/8)], and the per-track selection probability is set so
    // the expected fraction of flagged (track, frame) cells equals the
    // configured rate.
    if (cfg.occlusion_rate > 0) {
        const std::size_t max_len = std::max<std::size_t>(1, t_n / 8);
        const double mean_len = (1.0 + static_cast<double>(max_len)) / 2.0;
        const double p_track =
            std::min(1.0, cfg.occlusion_rate * static_cast<double>(t_n) / mean_len);
        for (std::size_t ni = 0; ni < n; ++ni) {
            if (occ.next_double() >= p_track) continue;
            const std::size_t len = 1 + static_cast<std::size_t>(occ.next_below(max_len));
            const std::size_t start = static_cast<std::size_t>(occ.next_below(t_n - len + 1));
            for (std::size_t ti = start; ti < start + len; ++ti) set.occlusion[ti * n + ni] = 1;
        }
    }

    set.validate();
    return set;
}

GenSummary generate_dataset(const GenConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "tracks", ec);
    if (ec) throw IoError("cannot create " + out_dir + "/tracks: " + ec.message());
    if (cfg.render) {
        fs::create_directories(fs::path(out_dir) / "frames", ec);
        if (ec) throw IoError("cannot create " + out_dir + "/frames: " + ec.message());
    }

    const Rng master(cfg.seed);
    std::vector<trackio::ManifestEntry> entries;
    GenSummary summary;
    summary.classes = cfg.families.size();

    const struct {
        trackio::Split split;
        std::size_t count;
    } splits[] = {{trackio::Split::train, cfg.train_per_class},
                  {trackio::Split::val, cfg.val_per_class},
                  {trackio::Split::test, cfg.test_per_class}};

    std::uint64_t running = 0;
    for (const auto& sp : splits) {
        for (std::size_t fam = 0; fam < cfg.families.size(); ++fam) {
            for (std::size_t i = 0; i < sp.count; ++i, ++running) {
                char idx[32];
                std::snprintf(idx, sizeof(idx), "%04zu", i);
                const std::string id = cfg.families[fam] + "_" +
                                       trackio::split_name(sp.split) + "_" + idx;
                const auto set = make_sample(cfg, fam, id, master.derive(running).state());
                const std::string rel = "tracks/" + id + ".ptrk";
                trackio::save_tracks(set, (fs::path(out_dir) / rel).string());
                if (cfg.render) {
                    const auto vol = render_frames(set, cfg.image_h, cfg.image_w, cfg.blob_sigma);
                    frames::save_frames(vol, (fs::path(out_dir) / "frames" / (id + ".frms")).string());
                }
                trackio::ManifestEntry e;
                e.file = rel;
                e.split = sp.split;
                e.label_kind = trackio::LabelKind::class_index;
                e.class_label = static_cast<std::uint32_t>(fam);
                e.video_id = id;
                entries.push_back(std::move(e));
                ++summary.samples;
                if (sp.split == trackio::Split::train) ++summary.train;
                else if (sp.split == trackio::Split::val) ++summary.val;
                else ++summary.test;
            }
        }
    }

    summary.manifest_path = (fs::path(out_dir) / "manifest.json").string();
    trackio::save_manifest(summary.manifest_path, entries);
    return summary;
}

frames::FrameVolume render_frames(const trackio::PointTrackSet& set, std::size_t height,
                                  std::size_t width, double sigma_px) {
    if (!set.normalized) throw DataError("render requires normalized coordinates");
    if (sigma_px <= 0) throw ConfigError("blob sigma must be positive");
    if (6.0 * sigma_px > static_cast<double>(std::min(height, width)))
        throw ConfigError("resolution " + std::to_string(height) + "x" + std::to_string(width) +
                          " too small for blob sigma " + std::to_string(sigma_px));

    frames::FrameVolume vol;
    vol.frames = set.frames;
    vol.height = height;
    vol.width = width;
    vol.values.assign(vol.expected_size(), 0.0f);

    const int win = static_cast<int>(std::ceil(4.0 * sigma_px));
    const double inv = 1.0 / (2.0 * sigma_px * sigma_px);
    for (std::size_t ti = 0; ti < set.frames; ++ti) {
        for (std::size_t ni = 0; ni < set.tracks; ++ni) {
            if (set.occluded(ti, ni)) continue;
            const double px = static_cast<double>(set.x(ti, ni)) * static_cast<double>(width - 1);
            const double py = static_cast<double>(set.y(ti, ni)) * static_cast<double>(height - 1);
            const int x0 = std::max(0, static_cast<int>(std::floor(px)) - win);
            const int x1 = std::min(static_cast<int>(width) - 1,
                                    static_cast<int>(std::ceil(px)) + win);
            const int y0 = std::max(0, static_cast<int>(std::floor(py)) - win);
            const int y1 = std::min(static_cast<int>(height) - 1,
                                    static_cast<int>(std::ceil(py)) + win);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
                    vol.at(ti, static_cast<std::size_t>(y), static_cast<std::size_t>(x), 0) +=
                        static_cast<float>(std::exp(-d2 * inv));
                }
            }
        }
    }
    // Clamp the summed intensities, then copy channel 0 into channels 1 and 2.
    for (std::size_t i = 0; i < vol.values.size(); i += 3) {
        vol.values[i] = std::min(1.0f, vol.values[i]);
        vol.values[i + 1] = vol.values[i];
        vol.values[i + 2] = vol.values[i];
    }
    return vol;
}

}  // namespace movt::synthgen
