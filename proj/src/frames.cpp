#include "movt/frames.hpp"

#include <cmath>

#include "movt/binio.hpp"

namespace movt::frames {

namespace {
constexpr char kMagic[4] = {'F', 'R', 'M', 'S'};
}

void FrameVolume::validate() const {
    if (frames == 0 || height == 0 || width == 0)
        throw DataError("frame volume has a zero dimension");
    if (values.size() != expected_size())
        throw DataError("frame volume holds " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(expected_size()));
    for (float v : values)
        if (!std::isfinite(v)) throw DataError("frame volume contains a non-finite value");
}

void save_frames(const FrameVolume& v, const std::string& path) {
    v.validate();
    std::string out;
    out.reserve(16 + v.values.size() * 4);
    out.append(kMagic, 4);
    binio::put_u32(out, static_cast<std::uint32_t>(v.frames));
    binio::put_u32(out, static_cast<std::uint32_t>(v.height));
    binio::put_u32(out, static_cast<std::uint32_t>(v.width));
    for (float x : v.values) binio::put_f32(out, x);
    binio::write_file(path, out);
}

FrameVolume load_frames(const std::string& path) {
    const std::string bytes = binio::read_file(path);
    binio::Reader r(bytes, path);
    if (r.str(4) != std::string(kMagic, 4)) throw DataError("bad frame volume magic: " + path);
    FrameVolume v;
    v.frames = r.u32();
    v.height = r.u32();
    v.width = r.u32();
    const std::size_t n = v.expected_size();
    if (v.frames == 0 || v.height == 0 || v.width == 0)
        throw DataError("frame volume header has a zero dimension: " + path);
    v.values.resize(n);
    r.raw(v.values.data(), n * 4);
    if (!r.at_end()) throw DataError("trailing bytes after frame volume payload: " + path);
    v.validate();
    return v;
}

}  // namespace movt::frames
