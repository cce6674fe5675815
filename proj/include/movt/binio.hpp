#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "movt/common.hpp"

// Little-endian binary primitives shared by the PTRK, checkpoint, and frame
// volume formats. Byte order is explicit so files are portable across hosts.

namespace movt::binio {

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

// Bounds-checked sequential reader over an in-memory file image.
class Reader {
  public:
    Reader(const std::string& bytes, std::string path)
        : bytes_(bytes), path_(std::move(path)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint16_t u16() {
        need(2);
        const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
        pos_ += 2;
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }

    std::uint32_t u32() {
        need(4);
        const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
        pos_ += 4;
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string str(std::size_t len) {
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    void raw(void* dst, std::size_t len) {
        need(len);
        std::memcpy(dst, bytes_.data() + pos_, len);
        pos_ += len;
    }

    bool at_end() const { return pos_ == bytes_.size(); }
    const std::string& path() const { return path_; }

  private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw DataError("truncated file: " + path_);
    }

    const std::string& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace movt::binio
