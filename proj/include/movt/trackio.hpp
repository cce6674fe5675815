#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "movt/common.hpp"

namespace movt::trackio {

enum class LabelKind : std::uint8_t { none = 0, class_index = 1, regression = 2 };

// A set of point tracks for one clip: per-frame (x, y) plus an occlusion
// flag per track. Positions are frame-major (frame, then track, then x,y).
// Instances are immutable in practice: every transform returns a new set.
struct PointTrackSet {
    std::string video_id;
    std::size_t frames = 0;
    std::size_t tracks = 0;
    std::vector<float> positions;       // frames * tracks * 2
    std::vector<std::uint8_t> occlusion;  // frames * tracks
    bool normalized = false;
    float width = 0;   // 0 = unknown
    float height = 0;  // 0 = unknown
    float fps = 0;     // 0 = unknown
    LabelKind label_kind = LabelKind::none;
    std::uint32_t class_label = 0;
    std::vector<float> regression_label;

    float x(std::size_t t, std::size_t n) const { return positions[(t * tracks + n) * 2]; }
    float y(std::size_t t, std::size_t n) const { return positions[(t * tracks + n) * 2 + 1]; }
    float& x(std::size_t t, std::size_t n) { return positions[(t * tracks + n) * 2]; }
    float& y(std::size_t t, std::size_t n) { return positions[(t * tracks + n) * 2 + 1]; }
    bool occluded(std::size_t t, std::size_t n) const { return occlusion[t * tracks + n] != 0; }

    // Throws DataError when any structural invariant is broken.
    void validate() const;

    bool operator==(const PointTrackSet&) const = default;
};

// Per-track velocities with the occlusion flag as a third channel,
// track-major: values[(n * frames + t) * 3 + {0,1,2}]. Frame 0 carries zero
// velocity so the tensor keeps the full frame count.
struct VelocityTensor {
    std::size_t tracks = 0;
    std::size_t frames = 0;
    std::vector<float> values;  // tracks * frames * 3
};

void save_tracks(const PointTrackSet& set, const std::string& path);
PointTrackSet load_tracks(const std::string& path);

VelocityTensor compute_velocity(const PointTrackSet& set);

// Arithmetic mean of (x, y) over all frames per track, including occluded
// frames. Returns tracks * 2 values.
std::vector<float> mean_position(const PointTrackSet& set);

// Keeps the middle n frames: [floor((frames - n)/2), same + n).
PointTrackSet temporal_crop(const PointTrackSet& set, std::size_t n);

// Keeps k distinct tracks chosen uniformly without replacement, original
// order preserved. Deterministic per seed.
PointTrackSet subsample_tracks(const PointTrackSet& set, std::size_t k, std::uint64_t seed);

// Divides x by width and y by height. Requires a known resolution and
// tolerates up to 1% per-dimension overshoot, which is clamped into [0, 1].
PointTrackSet normalize_coordinates(const PointTrackSet& set);

// Uniformly spaced normalized grid coordinates with half-cell margins,
// row-major, x first. rows * cols * 2 values.
std::vector<float> make_grid(std::size_t rows, std::size_t cols);

}  // namespace movt::trackio
