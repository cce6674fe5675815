#include "movt/trackio.hpp"

#include <cmath>
#include <cstring>

#include "movt/binio.hpp"
#include "movt/rng.hpp"

namespace movt::trackio {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'R', 'K'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kFlagNormalized = 1;
// Overshoot tolerated by normalize_coordinates, as a fraction of each
// dimension (tracker jitter at frame borders).
constexpr float kNormalizeSlack = 0.01f;

}  // namespace

void PointTrackSet::validate() const {
    if (frames < 2) throw DataError("track set needs at least 2 frames");
    if (tracks < 1) throw DataError("track set needs at least 1 track");
    if (positions.size() != frames * tracks * 2)
        throw DataError("position array size disagrees with frame/track counts");
    if (occlusion.size() != frames * tracks)
        throw DataError("occlusion array size disagrees with frame/track counts");
    for (const float v : positions) {
        if (!std::isfinite(v)) throw DataError("non-finite position entry");
    }
    for (const std::uint8_t o : occlusion) {
        if (o > 1) throw DataError("occlusion entry outside {0, 1}");
    }
    if (normalized) {
        for (const float v : positions) {
            if (v < 0.0f || v > 1.0f) throw DataError("normalized position outside [0, 1]");
        }
    }
    if (label_kind == LabelKind::regression && regression_label.empty())
        throw DataError("regression label must be non-empty");
}

void save_tracks(const PointTrackSet& set, const std::string& path) {
    set.validate();
    std::string out;
    out.reserve(64 + set.positions.size() * 4 + set.occlusion.size());
    out.append(kMagic, 4);
    binio::put_u16(out, kVersion);
    binio::put_u16(out, set.normalized ? kFlagNormalized : 0);
    binio::put_u32(out, static_cast<std::uint32_t>(set.frames));
    binio::put_u32(out, static_cast<std::uint32_t>(set.tracks));
    binio::put_f32(out, set.width);
    binio::put_f32(out, set.height);
    binio::put_f32(out, set.fps);
    if (set.video_id.size() > 0xffff) throw DataError("video_id longer than 65535 bytes");
    binio::put_u16(out, static_cast<std::uint16_t>(set.video_id.size()));
    out.append(set.video_id);
    for (const float v : set.positions) binio::put_f32(out, v);
    out.append(reinterpret_cast<const char*>(set.occlusion.data()), set.occlusion.size());
    out.push_back(static_cast<char>(set.label_kind));
    if (set.label_kind == LabelKind::class_index) {
        binio::put_u32(out, set.class_label);
    } else if (set.label_kind == LabelKind::regression) {
        if (set.regression_label.size() > 0xffff)
            throw DataError("regression label longer than 65535 entries");
        binio::put_u16(out, static_cast<std::uint16_t>(set.regression_label.size()));
        for (const float v : set.regression_label) binio::put_f32(out, v);
    }
    binio::write_file(path, out);
}

PointTrackSet load_tracks(const std::string& path) {
    const std::string bytes = binio::read_file(path);
    binio::Reader r(bytes, path);

    const std::string magic = r.str(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw DataError("bad magic bytes (not a PTRK file): " + path);
    const std::uint16_t version = r.u16();
    if (version != kVersion)
        throw DataError("unsupported PTRK version " + std::to_string(version) + ": " + path);
    const std::uint16_t flags = r.u16();

    PointTrackSet set;
    set.normalized = (flags & kFlagNormalized) != 0;
    set.frames = r.u32();
    set.tracks = r.u32();
    set.width = r.f32();
    set.height = r.f32();
    set.fps = r.f32();
    set.video_id = r.str(r.u16());
    if (set.frames == 0 || set.tracks == 0 ||
        set.frames * set.tracks > (std::size_t(1) << 31))
        throw DataError("implausible frame/track counts: " + path);
    set.positions.resize(set.frames * set.tracks * 2);
    for (float& v : set.positions) v = r.f32();
    set.occlusion.resize(set.frames * set.tracks);
    r.raw(set.occlusion.data(), set.occlusion.size());
    const std::uint8_t tag = r.u8();
    switch (tag) {
        case 0:
            set.label_kind = LabelKind::none;
            break;
        case 1:
            set.label_kind = LabelKind::class_index;
            set.class_label = r.u32();
            break;
        case 2: {
            set.label_kind = LabelKind::regression;
            set.regression_label.resize(r.u16());
            for (float& v : set.regression_label) v = r.f32();
            break;
        }
        default:
            throw DataError("unknown label tag: " + path);
    }
    if (!r.at_end()) throw DataError("trailing bytes after payload: " + path);
    set.validate();
    return set;
}

VelocityTensor compute_velocity(const PointTrackSet& set) {
    if (set.frames < 2) throw DataError("velocity needs at least 2 frames");
    VelocityTensor v;
    v.tracks = set.tracks;
    v.frames = set.frames;
    v.values.assign(set.tracks * set.frames * 3, 0.0f);
    for (std::size_t n = 0; n < set.tracks; ++n) {
        float* row = v.values.data() + n * set.frames * 3;
        row[0] = 0.0f;
        row[1] = 0.0f;
        row[2] = set.occluded(0, n) ? 1.0f : 0.0f;
        for (std::size_t t = 1; t < set.frames; ++t) {
            row[t * 3] = set.x(t, n) - set.x(t - 1, n);
            row[t * 3 + 1] = set.y(t, n) - set.y(t - 1, n);
            row[t * 3 + 2] = set.occluded(t, n) ? 1.0f : 0.0f;
        }
    }
    return v;
}

std::vector<float> mean_position(const PointTrackSet& set) {
    std::vector<float> out(set.tracks * 2);
    const double inv_t = 1.0 / static_cast<double>(set.frames);
    for (std::size_t n = 0; n < set.tracks; ++n) {
        double sx = 0, sy = 0;
        for (std::size_t t = 0; t < set.frames; ++t) {
            sx += set.x(t, n);
            sy += set.y(t, n);
        }
        out[n * 2] = static_cast<float>(sx * inv_t);
        out[n * 2 + 1] = static_cast<float>(sy * inv_t);
    }
    return out;
}

PointTrackSet temporal_crop(const PointTrackSet& set, std::size_t n) {
    if (n < 2 || n > set.frames)
        throw DataError("temporal_crop: frame count out of range [2, frames]");
    const std::size_t start = (set.frames - n) / 2;
    PointTrackSet out = set;
    out.frames = n;
    out.positions.assign(
        set.positions.begin() + static_cast<std::ptrdiff_t>(start * set.tracks * 2),
        set.positions.begin() + static_cast<std::ptrdiff_t>((start + n) * set.tracks * 2));
    out.occlusion.assign(
        set.occlusion.begin() + static_cast<std::ptrdiff_t>(start * set.tracks),
        set.occlusion.begin() + static_cast<std::ptrdiff_t>((start + n) * set.tracks));
    return out;
}

PointTrackSet subsample_tracks(const PointTrackSet& set, std::size_t k, std::uint64_t seed) {
    if (k < 1 || k > set.tracks) throw DataError("subsample_tracks: k out of range [1, tracks]");
    Rng rng(seed);
    const std::vector<std::size_t> keep = rng.sample_indices(set.tracks, k);
    PointTrackSet out = set;
    out.tracks = k;
    out.positions.resize(set.frames * k * 2);
    out.occlusion.resize(set.frames * k);
    for (std::size_t t = 0; t < set.frames; ++t) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t n = keep[i];
            out.positions[(t * k + i) * 2] = set.x(t, n);
            out.positions[(t * k + i) * 2 + 1] = set.y(t, n);
            out.occlusion[t * k + i] = set.occlusion[t * set.tracks + n];
        }
    }
    return out;
}

PointTrackSet normalize_coordinates(const PointTrackSet& set) {
    if (set.normalized) throw DataError("set is already normalized");
    if (set.width <= 0 || set.height <= 0)
        throw DataError("normalize_coordinates needs a positive resolution");
    PointTrackSet out = set;
    const float sx = set.width * kNormalizeSlack;
    const float sy = set.height * kNormalizeSlack;
    for (std::size_t i = 0; i < out.positions.size(); i += 2) {
        const float px = out.positions[i];
        const float py = out.positions[i + 1];
        if (px < -sx || px > set.width + sx || py < -sy || py > set.height + sy)
            throw DataError("coordinate outside resolution beyond tolerated slack");
        out.positions[i] = std::min(1.0f, std::max(0.0f, px / set.width));
        out.positions[i + 1] = std::min(1.0f, std::max(0.0f, py / set.height));
    }
    out.normalized = true;
    return out;
}

std::vector<float> make_grid(std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) throw ConfigError("make_grid: extents must be positive");
    std::vector<float> out;
    out.reserve(rows * cols * 2);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out.push_back((static_cast<float>(j) + 0.5f) / static_cast<float>(cols));
            out.push_back((static_cast<float>(i) + 0.5f) / static_cast<float>(rows));
        }
    }
    return out;
}

}  // namespace movt::trackio
