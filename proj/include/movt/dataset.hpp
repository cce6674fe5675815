#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/manifest.hpp"
#include "movt/tensor.hpp"

namespace movt::data {

struct LoadOptions {
    bool with_frames = false;     // also load the rendered frame volumes
    std::size_t crop_frames = 0;  // 0 = keep all frames, else center-crop to this count
    std::size_t keep_tracks = 0;  // 0 = keep all tracks, else subsample per clip
    std::uint64_t subsample_seed = 0;
};

// Whole dataset resident in memory as model-ready tensors, one entry per
// manifest sample. Track/frame counts must be uniform across samples.
struct Dataset {
    std::vector<std::string> ids;
    std::vector<trackio::Split> splits;
    std::vector<std::uint32_t> labels;        // classification labels
    std::vector<std::vector<float>> targets;  // regression targets
    bool regression = false;
    std::size_t classes = 0;  // classification: max label + 1
    std::size_t tracks = 0;
    std::size_t frames = 0;
    std::vector<nn::Tensor<float>> velocity;  // per sample [tracks, frames, 3]
    std::vector<nn::Tensor<float>> means;     // per sample [tracks, 2]
    std::vector<nn::Tensor<float>> pixels;    // per sample [frames, H, W, 3]
    std::size_t image_h = 0, image_w = 0;

    std::size_t size() const { return ids.size(); }
};

// Loads every manifest sample, applying the temporal crop, then the track
// subsample (seeded per sample), then velocity/mean extraction. Frame volumes
// are looked up as frames/<ptrk stem>.frms beside the manifest's tracks/
// directory. Throws DataError on mixed label kinds, non-uniform shapes, or
// unnormalized coordinates.
Dataset load_dataset(const std::string& manifest_path, const LoadOptions& opt = {});

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

// Uses the manifest's explicit val split when present; otherwise carves a
// stratified tenth of train (at least one sample per class, never the whole
// class) deterministically from the given seed.
SplitIndices make_splits(const Dataset& ds, std::uint64_t seed);

// Stratified subset of the given training indices keeping ceil(fraction *
// class count) per class (plain ceil of the total for regression data).
// Deterministic per seed; fraction 1 returns the input unchanged.
std::vector<std::size_t> reduce_training_set(const Dataset& ds,
                                             const std::vector<std::size_t>& train,
                                             double fraction, std::uint64_t seed);

// SHA-256 over the manifest bytes followed by every referenced track file in
// manifest order; frame volumes are included when present.
std::string dataset_fingerprint(const std::string& manifest_path);

}  // namespace movt::data
