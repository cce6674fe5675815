#include "movt/flops.hpp"

namespace movt::model {

std::uint64_t params_linear(std::uint64_t in, std::uint64_t out) { return in * out + out; }

std::uint64_t flops_linear(std::uint64_t tokens, std::uint64_t in, std::uint64_t out) {
    return 2 * tokens * in * out + tokens * out;
}

std::uint64_t params_conv1d(std::uint64_t kernel, std::uint64_t in, std::uint64_t out) {
    return kernel * in * out + out;
}

std::uint64_t flops_conv1d(std::uint64_t rows, std::uint64_t time, std::uint64_t kernel,
                           std::uint64_t in, std::uint64_t out) {
    return 2 * rows * time * kernel * in * out + rows * time * out;
}

namespace {

void add(ComputeReport& r, std::string name, std::uint64_t params, std::uint64_t flops) {
    r.rows.push_back({std::move(name), params, flops});
    r.total_params += params;
    r.total_flops += flops;
}

// Shared transformer stack + head: `tokens` tokens of width dim.
void add_encoder_and_head(ComputeReport& r, std::uint64_t dim, std::uint64_t layers,
                          std::uint64_t ff_expansion, std::uint64_t tokens,
                          std::uint64_t head_out) {
    for (std::uint64_t i = 0; i < layers; ++i) {
        const std::string b = "encoder.block" + std::to_string(i);
        add(r, b + ".ln1", 2 * dim, 0);
        add(r, b + ".attn.qkv", params_linear(dim, 3 * dim), flops_linear(tokens, dim, 3 * dim));
        add(r, b + ".attn.scores", 0, 2 * tokens * tokens * dim);
        add(r, b + ".attn.values", 0, 2 * tokens * tokens * dim);
        add(r, b + ".attn.proj", params_linear(dim, dim), flops_linear(tokens, dim, dim));
        add(r, b + ".ln2", 2 * dim, 0);
        add(r, b + ".ff1", params_linear(dim, dim * ff_expansion),
            flops_linear(tokens, dim, dim * ff_expansion));
        add(r, b + ".ff2", params_linear(dim * ff_expansion, dim),
            flops_linear(tokens, dim * ff_expansion, dim));
    }
    add(r, "encoder.norm", 2 * dim, 0);
    add(r, "head", params_linear(dim, head_out), flops_linear(1, dim, head_out));
}

void add_mlp(ComputeReport& r, const std::string& name, std::uint64_t in, std::uint64_t width,
             std::uint64_t depth, std::uint64_t tokens) {
    add(r, name + ".0", params_linear(in, width), flops_linear(tokens, in, width));
    for (std::uint64_t i = 1; i < depth; ++i) {
        add(r, name + "." + std::to_string(i), params_linear(width, width),
            flops_linear(tokens, width, width));
    }
}

}  // namespace

ComputeReport movt_compute(const MovTConfig& cfg, std::size_t tracks, std::size_t frames) {
    cfg.validate();
    ComputeReport r;
    const std::uint64_t n = tracks, t = frames, d = cfg.embed_dim, dim = cfg.token_dim();
    add_mlp(r, "motion.mlp", 3, d, cfg.mlp_depth, n * t);
    add(r, "motion.conv", params_conv1d(cfg.conv_kernel, d, d),
        flops_conv1d(n, t, cfg.conv_kernel, d, d));
    add_mlp(r, "position.mlp", 2, d, cfg.mlp_depth, n);
    add_encoder_and_head(r, dim, cfg.layers, cfg.ff_expansion, n, cfg.head_out());
    return r;
}

ComputeReport pixt_compute(const PixTConfig& cfg, std::size_t frames) {
    cfg.validate();
    ComputeReport r;
    const std::uint64_t p = cfg.patches(), t = frames, d = cfg.embed_dim, dim = cfg.token_dim();
    add_mlp(r, "patch.mlp", cfg.patch_features(), d, cfg.mlp_depth, p * t);
    add(r, "patch.conv", params_conv1d(cfg.conv_kernel, d, d),
        flops_conv1d(p, t, cfg.conv_kernel, d, d));
    add(r, "proj", params_linear(d, dim), flops_linear(p, d, dim));
    add(r, "pos_table", p * dim, 0);
    add_encoder_and_head(r, dim, cfg.layers, cfg.ff_expansion, p, cfg.head_out());
    return r;
}

std::uint64_t count_params(const MovTConfig& cfg) {
    return movt_compute(cfg, cfg.expected_tracks, cfg.expected_frames).total_params;
}

std::uint64_t count_params(const PixTConfig& cfg) {
    return pixt_compute(cfg, cfg.expected_frames).total_params;
}

double count_gflops(const MovTConfig& cfg, std::size_t tracks, std::size_t frames) {
    return movt_compute(cfg, tracks, frames).gflops();
}

double count_gflops(const PixTConfig& cfg, std::size_t frames) {
    return pixt_compute(cfg, frames).gflops();
}

}  // namespace movt::model
