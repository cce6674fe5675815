#include "movt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "movt/binio.hpp"
#include "movt/frames.hpp"
#include "movt/rng.hpp"
#include "movt/sha256.hpp"

namespace movt::data {

namespace fs = std::filesystem;

static fs::path frames_path_for(const fs::path& base_dir, const std::string& track_file) {
    const fs::path rel(track_file);
    return base_dir / "frames" / (rel.stem().string() + ".frms");
}

Dataset load_dataset(const std::string& manifest_path, const LoadOptions& opt) {
    const auto entries = trackio::load_manifest(manifest_path);
    if (entries.empty()) throw DataError(manifest_path + ": manifest lists no samples");
    const fs::path base_dir = fs::path(manifest_path).parent_path();

    Dataset ds;
    ds.ids.reserve(entries.size());
    bool first = true;
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
        const auto& e = entries[idx];
        trackio::PointTrackSet set = trackio::load_tracks((base_dir / e.file).string());
        if (opt.crop_frames > 0) set = trackio::temporal_crop(set, opt.crop_frames);
        if (opt.keep_tracks > 0) {
            const Rng seed_src(opt.subsample_seed);
            set = trackio::subsample_tracks(set, opt.keep_tracks,
                                            seed_src.derive(idx).state());
        }
        if (!set.normalized)
            throw DataError(e.file + ": training data must use normalized coordinates");

        const bool is_regression = e.label_kind == trackio::LabelKind::regression;
        if (e.label_kind == trackio::LabelKind::none)
            throw DataError(e.file + ": manifest sample has no label");
        if (first) {
            ds.regression = is_regression;
            ds.tracks = set.tracks;
            ds.frames = set.frames;
            first = false;
        } else {
            if (is_regression != ds.regression)
                throw DataError(e.file + ": mixed label kinds in one manifest");
            if (set.tracks != ds.tracks || set.frames != ds.frames)
                throw DataError(e.file + ": shape " + std::to_string(set.tracks) + "x" +
                                std::to_string(set.frames) + " differs from " +
                                std::to_string(ds.tracks) + "x" + std::to_string(ds.frames));
        }

        const trackio::VelocityTensor vel = trackio::compute_velocity(set);
        nn::Tensor<float> v({set.tracks, set.frames, 3});
        std::copy(vel.values.begin(), vel.values.end(), v.data.begin());
        const std::vector<float> mp = trackio::mean_position(set);
        nn::Tensor<float> m({set.tracks, 2});
        std::copy(mp.begin(), mp.end(), m.data.begin());
        ds.velocity.push_back(std::move(v));
        ds.means.push_back(std::move(m));

        if (opt.with_frames) {
            const auto fpath = frames_path_for(base_dir, e.file);
            frames::FrameVolume vol = frames::load_frames(fpath.string());
            if (opt.crop_frames > 0) {
                // Match the temporal crop applied to the tracks.
                const std::size_t start = (vol.frames - opt.crop_frames) / 2;
                if (opt.crop_frames > vol.frames)
                    throw DataError(fpath.string() + ": crop longer than clip");
                frames::FrameVolume cropped;
                cropped.frames = opt.crop_frames;
                cropped.height = vol.height;
                cropped.width = vol.width;
                const std::size_t stride = vol.height * vol.width * 3;
                cropped.values.assign(vol.values.begin() + start * stride,
                                      vol.values.begin() + (start + opt.crop_frames) * stride);
                vol = std::move(cropped);
            }
            if (ds.pixels.empty()) {
                ds.image_h = vol.height;
                ds.image_w = vol.width;
            } else if (vol.height != ds.image_h || vol.width != ds.image_w) {
                throw DataError(fpath.string() + ": frame resolution differs across samples");
            }
            if (vol.frames != ds.frames)
                throw DataError(fpath.string() + ": frame count differs from track frames");
            nn::Tensor<float> px({vol.frames, vol.height, vol.width, 3});
            std::copy(vol.values.begin(), vol.values.end(), px.data.begin());
            ds.pixels.push_back(std::move(px));
        }

        ds.ids.push_back(e.video_id.empty() ? e.file : e.video_id);
        ds.splits.push_back(e.split);
        if (is_regression) {
            if (e.regression_label.empty())
                throw DataError(e.file + ": regression sample without a target");
            ds.targets.push_back(e.regression_label);
            if (ds.targets.front().size() != ds.targets.back().size())
                throw DataError(e.file + ": regression target width differs across samples");
        } else {
            ds.labels.push_back(e.class_label);
            ds.classes = std::max<std::size_t>(ds.classes, e.class_label + 1);
        }
    }
    return ds;
}

SplitIndices make_splits(const Dataset& ds, std::uint64_t seed) {
    SplitIndices s;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        switch (ds.splits[i]) {
            case trackio::Split::train: s.train.push_back(i); break;
            case trackio::Split::val: s.val.push_back(i); break;
            case trackio::Split::test: s.test.push_back(i); break;
        }
    }
    if (!s.val.empty() || s.train.empty()) return s;

    // No explicit val split: carve a stratified tenth out of train.
    std::map<std::uint32_t, std::vector<std::size_t>> by_class;
    if (ds.regression) {
        by_class[0] = s.train;
    } else {
        for (std::size_t i : s.train) by_class[ds.labels[i]].push_back(i);
    }
    const Rng root(seed);
    std::vector<std::size_t> new_train, new_val;
    std::uint64_t stream = 0;
    for (auto& [cls, members] : by_class) {
        (void)cls;
        Rng rng = root.derive(stream++);
        std::size_t carve = std::max<std::size_t>(1, members.size() / 10);
        if (carve >= members.size()) carve = members.size() - 1;
        const auto picked = rng.sample_indices(members.size(), carve);
        std::vector<bool> is_val(members.size(), false);
        for (std::size_t p : picked) is_val[p] = true;
        for (std::size_t i = 0; i < members.size(); ++i)
            (is_val[i] ? new_val : new_train).push_back(members[i]);
    }
    std::sort(new_train.begin(), new_train.end());
    std::sort(new_val.begin(), new_val.end());
    s.train = std::move(new_train);
    s.val = std::move(new_val);
    return s;
}

std::vector<std::size_t> reduce_training_set(const Dataset& ds,
                                             const std::vector<std::size_t>& train,
                                             double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("training fraction must lie in (0,1], got " + std::to_string(fraction));
    if (fraction == 1.0) return train;
    std::map<std::uint32_t, std::vector<std::size_t>> by_class;
    if (ds.regression) {
        by_class[0] = train;
    } else {
        for (std::size_t i : train) by_class[ds.labels[i]].push_back(i);
    }
    const Rng root(seed);
    std::vector<std::size_t> kept;
    std::uint64_t stream = 0;
    for (auto& [cls, members] : by_class) {
        (void)cls;
        Rng rng = root.derive(stream++);
        const std::size_t want = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(members.size())));
        const auto picked = rng.sample_indices(members.size(), want);
        for (std::size_t p : picked) kept.push_back(members[p]);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::string dataset_fingerprint(const std::string& manifest_path) {
    const auto entries = trackio::load_manifest(manifest_path);
    const fs::path base_dir = fs::path(manifest_path).parent_path();
    Sha256 h;
    const std::string manifest_bytes = binio::read_file(manifest_path);
    h.update(manifest_bytes.data(), manifest_bytes.size());
    for (const auto& e : entries) {
        const std::string bytes = binio::read_file((base_dir / e.file).string());
        h.update(bytes.data(), bytes.size());
        const auto fpath = frames_path_for(base_dir, e.file);
        std::error_code ec;
        if (fs::exists(fpath, ec)) {
            const std::string fb = binio::read_file(fpath.string());
            h.update(fb.data(), fb.size());
        }
    }
    return h.hex_digest();
}

}  // namespace movt::data
