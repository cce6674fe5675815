#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/frames.hpp"
#include "movt/trackio.hpp"

namespace movt::synthgen {

// The eight motion families. All share one initial point distribution
// (uniform over the central box [0.35, 0.65]^2) so class identity is carried
// by motion, never by position.
extern const std::vector<std::string> kAllFamilies;

struct GenConfig {
    std::vector<std::string> families = kAllFamilies;
    std::size_t train_per_class = 200;
    std::size_t val_per_class = 25;
    std::size_t test_per_class = 50;
    std::size_t frames = 32;
    std::size_t tracks = 60;
    double noise_sigma = 0.005;    // Gaussian position noise, normalized units
    double occlusion_rate = 0.05;  // expected fraction of flagged (track, frame) cells
    double speed_jitter = 0.3;     // per-sample speed multiplier drawn from [1-j, 1+j]
    std::uint64_t seed = 0;
    bool render = false;  // also write blob-rendered frame volumes
    std::size_t image_h = 32;
    std::size_t image_w = 32;
    double blob_sigma = 1.5;  // pixels

    // Throws ConfigError on: < 2 families, unknown or duplicate family names,
    // zero counts, frames < 2, tracks < 1, sigma < 0, occlusion_rate or
    // speed_jitter outside [0, 1), or an unusable render geometry.
    void validate() const;
};

// One generated clip, before serialization. label indexes cfg.families.
trackio::PointTrackSet make_sample(const GenConfig& cfg, std::size_t family_index,
                                   const std::string& video_id, std::uint64_t sample_seed);

struct GenSummary {
    std::size_t samples = 0;
    std::size_t classes = 0;
    std::size_t train = 0, val = 0, test = 0;
    std::string manifest_path;
};

// Writes out_dir/tracks/<id>.ptrk (plus out_dir/frames/<id>.frms when
// cfg.render) and out_dir/manifest.json. Fully deterministic for a given
// config: per-sample seeds derive from (cfg.seed, running sample index).
GenSummary generate_dataset(const GenConfig& cfg, const std::string& out_dir);

// Renders every visible point as an isotropic Gaussian blob (peak 1) on a
// black background, summed then clamped to [0, 1], grayscale replicated over
// RGB. Throws DataError when the set is not normalized; ConfigError when
// 6 * sigma_px exceeds min(height, width).
frames::FrameVolume render_frames(const trackio::PointTrackSet& set, std::size_t height,
                                  std::size_t width, double sigma_px);

}  // namespace movt::synthgen
