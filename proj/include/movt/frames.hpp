#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "movt/common.hpp"

namespace movt::frames {

// Rendered clip: frames * height * width * 3 float32 values in [0, 1],
// laid out frame-major, row-major within a frame, RGB innermost.
struct FrameVolume {
    std::size_t frames = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    std::size_t expected_size() const { return frames * height * width * 3; }

    float& at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) {
        return values[((t * height + y) * width + x) * 3 + c];
    }
    float at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
        return values[((t * height + y) * width + x) * 3 + c];
    }

    // Throws DataError on zero dims, size mismatch, or non-finite values.
    void validate() const;
};

// Layout: "FRMS" magic, u32 frames/height/width, then the float32 payload.
void save_frames(const FrameVolume& v, const std::string& path);
FrameVolume load_frames(const std::string& path);

}  // namespace movt::frames
