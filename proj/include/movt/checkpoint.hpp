#pragma once

#include <string>
#include <type_traits>

#include "movt/binio.hpp"
#include "movt/sha256.hpp"
#include "movt/tensor.hpp"

// Model checkpoints: magic "MVTW", version, length-prefixed config JSON,
// then every parameter in declaration order as a shape header plus an f32
// payload. A checkpoint only loads into a model whose config hashes to the
// same value as the embedded one.

namespace movt::model {

namespace ckpt_detail {

constexpr char kMagic[4] = {'M', 'V', 'T', 'W'};
constexpr std::uint16_t kVersion = 1;

inline void read_header(binio::Reader& r, std::string* config_json) {
    const std::string magic = r.str(4);
    if (magic != std::string(kMagic, 4))
        throw DataError("bad magic bytes (not a checkpoint): " + r.path());
    const std::uint16_t version = r.u16();
    if (version != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    *config_json = r.str(r.u32());
}

}  // namespace ckpt_detail

// Reads just the embedded config so a caller can construct the right model
// before loading weights.
inline std::string checkpoint_config_json(const std::string& path) {
    const std::string bytes = binio::read_file(path);
    binio::Reader r(bytes, path);
    std::string config_json;
    ckpt_detail::read_header(r, &config_json);
    return config_json;
}

template <typename Model>
void save_checkpoint(Model& model, const std::string& path) {
    const std::string config_json = model.config_json();
    std::string out;
    out.append(ckpt_detail::kMagic, 4);
    binio::put_u16(out, ckpt_detail::kVersion);
    binio::put_u32(out, static_cast<std::uint32_t>(config_json.size()));
    out.append(config_json);
    const auto params = model.parameters();
    binio::put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
        binio::put_u16(out, static_cast<std::uint16_t>(p->name.size()));
        out.append(p->name);
        out.push_back(static_cast<char>(p->value.shape.size()));
        for (const std::size_t d : p->value.shape)
            binio::put_u32(out, static_cast<std::uint32_t>(d));
        for (const auto v : p->value.data) binio::put_f32(out, static_cast<float>(v));
    }
    binio::write_file(path, out);
}

template <typename Model>
void load_checkpoint(Model& model, const std::string& path) {
    const std::string bytes = binio::read_file(path);
    binio::Reader r(bytes, path);
    std::string config_json;
    ckpt_detail::read_header(r, &config_json);
    if (Sha256::of_string(config_json) != Sha256::of_string(model.config_json()))
        throw DataError("checkpoint config hash does not match the model's config: " + path);
    const auto params = model.parameters();
    const std::uint32_t count = r.u32();
    if (count != params.size())
        throw DataError("checkpoint parameter count mismatch: " + path);
    for (auto* p : params) {
        const std::string name = r.str(r.u16());
        if (name != p->name)
            throw DataError("checkpoint parameter order mismatch at '" + name + "': " + path);
        const std::uint8_t rank = r.u8();
        if (rank != p->value.shape.size())
            throw DataError("checkpoint shape rank mismatch at '" + name + "': " + path);
        for (const std::size_t d : p->value.shape) {
            if (r.u32() != d)
                throw DataError("checkpoint shape mismatch at '" + name + "': " + path);
        }
        for (auto& v : p->value.data) v = static_cast<std::remove_reference_t<decltype(v)>>(r.f32());
    }
    if (!r.at_end()) throw DataError("trailing bytes after checkpoint payload: " + path);
}

}  // namespace movt::model
