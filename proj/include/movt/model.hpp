#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "movt/layers.hpp"
#include "movt/trackio.hpp"

namespace movt::model {

enum class HeadKind { classification, regression };

// Architecture hyperparameters for the track model. The transformer model
// dimension is always 2 * embed_dim: per-track motion and position embeddings
// are concatenated, never re-projected.
struct MovTConfig {
    std::size_t embed_dim = 128;  // per-encoder width D
    std::size_t conv_kernel = 3;
    std::size_t layers = 4;
    std::size_t heads = 4;
    std::size_t ff_expansion = 4;
    std::size_t mlp_depth = 2;
    double dropout = 0.1;
    HeadKind head = HeadKind::classification;
    std::size_t classes = 8;
    std::size_t output_dim = 1;  // regression targets
    std::size_t expected_frames = 32;
    std::size_t expected_tracks = 60;

    std::size_t token_dim() const { return 2 * embed_dim; }
    std::size_t head_out() const {
        return head == HeadKind::classification ? classes : output_dim;
    }
    void validate() const;
};

// Pixel baseline sharing the transformer/head structure. Each spatial patch
// is one token; its per-frame RGB vector runs through the same MLP + temporal
// conv + time-max stack as the track model's motion branch, then a projection
// to the transformer dimension plus a learned per-patch positional embedding.
struct PixTConfig {
    std::size_t image_h = 64;
    std::size_t image_w = 64;
    std::size_t patch = 16;
    std::size_t embed_dim = 128;
    std::size_t conv_kernel = 3;
    std::size_t layers = 4;
    std::size_t heads = 4;
    std::size_t ff_expansion = 4;
    std::size_t mlp_depth = 2;
    double dropout = 0.1;
    HeadKind head = HeadKind::classification;
    std::size_t classes = 8;
    std::size_t output_dim = 1;
    std::size_t expected_frames = 32;

    std::size_t token_dim() const { return 2 * embed_dim; }
    std::size_t head_out() const {
        return head == HeadKind::classification ? classes : output_dim;
    }
    std::size_t patches() const { return (image_h / patch) * (image_w / patch); }
    std::size_t patch_features() const { return patch * patch * 3; }
    void validate() const;
};

std::string movt_config_to_json(const MovTConfig& cfg);
MovTConfig movt_config_from_json_text(const std::string& text);
std::string pixt_config_to_json(const PixTConfig& cfg);
PixTConfig pixt_config_from_json_text(const std::string& text);

// ---------------------------------------------------------------------------
// Building blocks

template <typename T>
struct MlpCache {
    std::vector<nn::LayerCache<T>> layers;
};

// Row-wise MLP: linear(in -> width), then (depth - 1) x [relu, linear(width
// -> width)].
template <typename T>
class Mlp {
  public:
    Mlp() = default;
    Mlp(std::size_t in, std::size_t width, std::size_t depth, const std::string& name) {
        if (depth < 1) throw ConfigError("mlp depth must be >= 1");
        layers_.emplace_back(nn::LayerSpec::make_linear(in, width), name + ".0");
        for (std::size_t i = 1; i < depth; ++i) {
            layers_.emplace_back(nn::LayerSpec::make_relu(), name + ".act" + std::to_string(i));
            layers_.emplace_back(nn::LayerSpec::make_linear(width, width),
                                 name + "." + std::to_string(i));
        }
    }

    nn::Tensor<T> forward(const nn::Tensor<T>& x, MlpCache<T>* cache) const {
        if (cache) cache->layers.assign(layers_.size(), {});
        nn::Tensor<T> cur = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            cur = layers_[i].forward(cur, cache ? &cache->layers[i] : nullptr);
        }
        return cur;
    }

    nn::Tensor<T> backward(const MlpCache<T>& cache, const nn::Tensor<T>& dy,
                           bool param_grads) const {
        nn::Tensor<T> cur = dy;
        for (std::size_t i = layers_.size(); i > 0; --i) {
            cur = layers_[i - 1].backward(cache.layers[i - 1], cur, param_grads);
        }
        return cur;
    }

    void init(Rng& rng) {
        for (auto& l : layers_) l.init(rng);
    }

    void collect(std::vector<nn::Parameter<T>*>& out) {
        for (auto& l : layers_) {
            for (auto& p : l.params()) out.push_back(&p);
        }
    }

  private:
    std::vector<nn::Layer<T>> layers_;
};

template <typename T>
struct TemporalEncoderCache {
    MlpCache<T> mlp;
    nn::LayerCache<T> conv;
    nn::LayerCache<T> pool;
    std::size_t rows = 0, time = 0, in = 0;
};

// Per-row temporal feature stack: row-wise MLP per time step, temporal
// convolution, then max over time. Input [rows, time, in] -> [rows, width].
template <typename T>
class TemporalEncoder {
  public:
    TemporalEncoder() = default;
    TemporalEncoder(std::size_t in, std::size_t width, std::size_t depth, std::size_t kernel,
                    const std::string& name)
        : mlp_(in, width, depth, name + ".mlp"),
          conv_(nn::LayerSpec::make_conv1d(width, width, kernel), name + ".conv"),
          pool_(nn::LayerSpec::make_maxpool_time(), name + ".pool"),
          width_(width) {}

    nn::Tensor<T> forward(const nn::Tensor<T>& x, TemporalEncoderCache<T>* cache) const {
        if (x.shape.size() != 3) throw ConfigError("temporal encoder expects [rows, time, ch]");
        const std::size_t rows = x.shape[0], time = x.shape[1], in = x.shape[2];
        nn::Tensor<T> flat = x;
        flat.reshape({rows * time, in});
        nn::Tensor<T> fea = mlp_.forward(flat, cache ? &cache->mlp : nullptr);
        fea.reshape({rows, time, width_});
        nn::Tensor<T> conv_out = conv_.forward(fea, cache ? &cache->conv : nullptr);
        nn::Tensor<T> pooled = pool_.forward(conv_out, cache ? &cache->pool : nullptr);
        if (cache) {
            cache->rows = rows;
            cache->time = time;
            cache->in = in;
        }
        return pooled;  // [rows, width]
    }

    nn::Tensor<T> backward(const TemporalEncoderCache<T>& cache, const nn::Tensor<T>& dy,
                           bool param_grads) const {
        nn::Tensor<T> d_conv_out = pool_.backward(cache.pool, dy);
        nn::Tensor<T> d_fea = conv_.backward(cache.conv, d_conv_out, param_grads);
        d_fea.reshape({cache.rows * cache.time, width_});
        nn::Tensor<T> dx = mlp_.backward(cache.mlp, d_fea, param_grads);
        dx.reshape({cache.rows, cache.time, cache.in});
        return dx;
    }

    void init(Rng& rng) {
        mlp_.init(rng);
        conv_.init(rng);
    }

    void collect(std::vector<nn::Parameter<T>*>& out) {
        mlp_.collect(out);
        for (auto& p : conv_.params()) out.push_back(&p);
    }

  private:
    Mlp<T> mlp_;
    nn::Layer<T> conv_;
    nn::Layer<T> pool_;
    std::size_t width_ = 0;
};

template <typename T>
struct EncoderBlockCache {
    nn::LayerCache<T> ln1, attn, ln2, ff1, act, ff2;
    std::vector<std::uint8_t> mask1, mask2;  // dropout keep masks; empty = off
};

template <typename T>
struct TransformerCache {
    std::vector<EncoderBlockCache<T>> blocks;
    nn::LayerCache<T> final_norm;
};

// Pre-norm encoder stack: x += drop(attn(ln(x))); x += drop(ff(ln(x)));
// closed by a final normalization.
template <typename T>
class TransformerEncoder {
  public:
    TransformerEncoder() = default;
    TransformerEncoder(std::size_t dim, std::size_t layers, std::size_t heads,
                       std::size_t ff_expansion, double dropout, const std::string& name)
        : dropout_(dropout), final_norm_(nn::LayerSpec::make_layer_norm(dim), name + ".norm") {
        for (std::size_t i = 0; i < layers; ++i) {
            const std::string b = name + ".block" + std::to_string(i);
            Block blk{
                nn::Layer<T>(nn::LayerSpec::make_layer_norm(dim), b + ".ln1"),
                nn::Layer<T>(nn::LayerSpec::make_mhsa(dim, heads), b + ".attn"),
                nn::Layer<T>(nn::LayerSpec::make_layer_norm(dim), b + ".ln2"),
                nn::Layer<T>(nn::LayerSpec::make_linear(dim, dim * ff_expansion), b + ".ff1"),
                nn::Layer<T>(nn::LayerSpec::make_relu(), b + ".act"),
                nn::Layer<T>(nn::LayerSpec::make_linear(dim * ff_expansion, dim), b + ".ff2"),
            };
            blocks_.push_back(std::move(blk));
        }
    }

    // dropout_rng == nullptr runs in eval mode (no dropout).
    nn::Tensor<T> forward(const nn::Tensor<T>& x, TransformerCache<T>* cache,
                          Rng* dropout_rng) const {
        if (cache) cache->blocks.assign(blocks_.size(), {});
        const bool drop = dropout_rng != nullptr && dropout_ > 0;
        const T inv_keep = drop ? static_cast<T>(1.0 / (1.0 - dropout_)) : T(1);
        nn::Tensor<T> cur = x;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const Block& blk = blocks_[i];
            EncoderBlockCache<T>* bc = cache ? &cache->blocks[i] : nullptr;
            nn::Tensor<T> t1 = blk.ln1.forward(cur, bc ? &bc->ln1 : nullptr);
            nn::Tensor<T> a = blk.attn.forward(t1, bc ? &bc->attn : nullptr);
            if (drop) {
                auto mask = make_mask(*dropout_rng, a.numel());
                nn::kern::apply_mask(a.ptr(), mask.data(), inv_keep, a.ptr(), a.numel());
                if (bc) bc->mask1 = std::move(mask);
            }
            nn::kern::add_inplace(a.ptr(), cur.ptr(), a.numel());
            cur = std::move(a);

            nn::Tensor<T> t2 = blk.ln2.forward(cur, bc ? &bc->ln2 : nullptr);
            nn::Tensor<T> f = blk.ff1.forward(t2, bc ? &bc->ff1 : nullptr);
            f = blk.act.forward(f, bc ? &bc->act : nullptr);
            f = blk.ff2.forward(f, bc ? &bc->ff2 : nullptr);
            if (drop) {
                auto mask = make_mask(*dropout_rng, f.numel());
                nn::kern::apply_mask(f.ptr(), mask.data(), inv_keep, f.ptr(), f.numel());
                if (bc) bc->mask2 = std::move(mask);
            }
            nn::kern::add_inplace(f.ptr(), cur.ptr(), f.numel());
            cur = std::move(f);
        }
        return final_norm_.forward(cur, cache ? &cache->final_norm : nullptr);
    }

    nn::Tensor<T> backward(const TransformerCache<T>& cache, const nn::Tensor<T>& dy,
                           bool param_grads) const {
        const T inv_keep = static_cast<T>(1.0 / (1.0 - dropout_));
        nn::Tensor<T> dcur = final_norm_.backward(cache.final_norm, dy, param_grads);
        for (std::size_t i = blocks_.size(); i > 0; --i) {
            const Block& blk = blocks_[i - 1];
            const EncoderBlockCache<T>& bc = cache.blocks[i - 1];

            nn::Tensor<T> d_branch = dcur;
            if (!bc.mask2.empty()) {
                nn::kern::apply_mask(d_branch.ptr(), bc.mask2.data(), inv_keep, d_branch.ptr(),
                                     d_branch.numel());
            }
            nn::Tensor<T> g = blk.ff2.backward(bc.ff2, d_branch, param_grads);
            g = blk.act.backward(bc.act, g, param_grads);
            g = blk.ff1.backward(bc.ff1, g, param_grads);
            g = blk.ln2.backward(bc.ln2, g, param_grads);
            nn::kern::add_inplace(g.ptr(), dcur.ptr(), g.numel());
            dcur = std::move(g);  // gradient at x1

            d_branch = dcur;
            if (!bc.mask1.empty()) {
                nn::kern::apply_mask(d_branch.ptr(), bc.mask1.data(), inv_keep, d_branch.ptr(),
                                     d_branch.numel());
            }
            g = blk.attn.backward(bc.attn, d_branch, param_grads);
            g = blk.ln1.backward(bc.ln1, g, param_grads);
            nn::kern::add_inplace(g.ptr(), dcur.ptr(), g.numel());
            dcur = std::move(g);
        }
        return dcur;
    }

    void init(Rng& rng) {
        for (auto& blk : blocks_) {
            blk.ln1.init(rng);
            blk.attn.init(rng);
            blk.ln2.init(rng);
            blk.ff1.init(rng);
            blk.ff2.init(rng);
        }
        final_norm_.init(rng);
    }

    void collect(std::vector<nn::Parameter<T>*>& out) {
        for (auto& blk : blocks_) {
            for (auto* l : {&blk.ln1, &blk.attn, &blk.ln2, &blk.ff1, &blk.ff2}) {
                for (auto& p : l->params()) out.push_back(&p);
            }
        }
        for (auto& p : final_norm_.params()) out.push_back(&p);
    }

  private:
    struct Block {
        nn::Layer<T> ln1, attn, ln2, ff1, act, ff2;
    };

    std::vector<std::uint8_t> make_mask(Rng& rng, std::size_t n) const {
        std::vector<std::uint8_t> mask(n);
        for (auto& keep : mask) keep = rng.next_double() >= dropout_ ? 1 : 0;
        return mask;
    }

    double dropout_ = 0.1;
    std::vector<Block> blocks_;
    nn::Layer<T> final_norm_;
};

// ---------------------------------------------------------------------------
// MovT

template <typename T>
struct MovTCache {
    TemporalEncoderCache<T> motion;
    MlpCache<T> position;
    TransformerCache<T> encoder;
    nn::LayerCache<T> pool, head;
    std::size_t batch = 0, tracks = 0, frames = 0;
};

template <typename T>
struct ModelOutput {
    nn::Tensor<T> output;     // [B, classes] logits or [B, output_dim]
    nn::Tensor<T> embedding;  // pooled video representation [B, 2D]
};

template <typename T>
struct MovTInputGrads {
    nn::Tensor<T> d_velocity;  // [B, N, T, 3]
    nn::Tensor<T> d_means;     // [B, N, 2]
};

// Track transformer: velocity and mean-position encoders feeding a
// cross-track transformer, mean-pooled into one video embedding.
template <typename T>
class MovTModel {
  public:
    explicit MovTModel(MovTConfig cfg)
        : cfg_((cfg.validate(), cfg)),
          motion_(3, cfg.embed_dim, cfg.mlp_depth, cfg.conv_kernel, "motion"),
          position_(2, cfg.embed_dim, cfg.mlp_depth, "position"),
          encoder_(cfg.token_dim(), cfg.layers, cfg.heads, cfg.ff_expansion, cfg.dropout,
                   "encoder"),
          pool_(nn::LayerSpec::make_mean_pool(), "pool"),
          head_(nn::LayerSpec::make_linear(cfg.token_dim(), cfg.head_out()), "head") {}

    const MovTConfig& config() const { return cfg_; }
    std::string config_json() const { return movt_config_to_json(cfg_); }

    void init(std::uint64_t seed) {
        Rng rng(seed);
        motion_.init(rng);
        position_.init(rng);
        encoder_.init(rng);
        head_.init(rng);
    }

    std::vector<nn::Parameter<T>*> parameters() {
        std::vector<nn::Parameter<T>*> out;
        motion_.collect(out);
        position_.collect(out);
        encoder_.collect(out);
        for (auto& p : head_.params()) out.push_back(&p);
        return out;
    }

    // Per-track motion embedding E_M. velocity [N, T, 3] -> [N, D].
    nn::Tensor<T> motion_encode(const nn::Tensor<T>& velocity) const {
        return motion_.forward(velocity, nullptr);
    }

    // Per-track position embedding E_P. means [N, 2] -> [N, D].
    nn::Tensor<T> position_encode(const nn::Tensor<T>& means) const {
        return position_.forward(means, nullptr);
    }

    // velocity [B, N, T, 3], means [B, N, 2]. dropout_rng enables training
    // mode; pass nullptr for deterministic eval.
    ModelOutput<T> forward(const nn::Tensor<T>& velocity, const nn::Tensor<T>& means,
                           MovTCache<T>* cache, Rng* dropout_rng) const {
        if (velocity.shape.size() != 4 || velocity.shape[3] != 3)
            throw ConfigError("velocity must be [batch, tracks, frames, 3]");
        if (means.shape.size() != 3 || means.shape[2] != 2)
            throw ConfigError("means must be [batch, tracks, 2]");
        const std::size_t b = velocity.shape[0], n = velocity.shape[1], t = velocity.shape[2];
        if (means.shape[0] != b || means.shape[1] != n)
            throw ConfigError("velocity/means disagree on batch or track count");
        const std::size_t d = cfg_.embed_dim;

        nn::Tensor<T> vel = velocity;
        vel.reshape({b * n, t, 3});
        nn::Tensor<T> e_m = motion_.forward(vel, cache ? &cache->motion : nullptr);  // [B*N, D]

        nn::Tensor<T> mean_rows = means;
        mean_rows.reshape({b * n, 2});
        nn::Tensor<T> e_p =
            position_.forward(mean_rows, cache ? &cache->position : nullptr);  // [B*N, D]

        nn::Tensor<T> tokens({b, n, 2 * d});
        for (std::size_t r = 0; r < b * n; ++r) {
            T* dst = tokens.ptr() + r * 2 * d;
            const T* pm = e_m.ptr() + r * d;
            const T* pp = e_p.ptr() + r * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] = pm[j];
            for (std::size_t j = 0; j < d; ++j) dst[d + j] = pp[j];
        }

        nn::Tensor<T> enc =
            encoder_.forward(tokens, cache ? &cache->encoder : nullptr, dropout_rng);
        nn::Tensor<T> e_f = pool_.forward(enc, cache ? &cache->pool : nullptr);  // [B, 2D]
        nn::Tensor<T> out = head_.forward(e_f, cache ? &cache->head : nullptr);
        if (cache) {
            cache->batch = b;
            cache->tracks = n;
            cache->frames = t;
        }
        return {std::move(out), std::move(e_f)};
    }

    MovTInputGrads<T> backward(const MovTCache<T>& cache, const nn::Tensor<T>& d_output,
                               bool param_grads) const {
        const std::size_t b = cache.batch, n = cache.tracks, t = cache.frames;
        const std::size_t d = cfg_.embed_dim;
        nn::Tensor<T> d_ef = head_.backward(cache.head, d_output, param_grads);
        nn::Tensor<T> d_enc = pool_.backward(cache.pool, d_ef);
        nn::Tensor<T> d_tokens = encoder_.backward(cache.encoder, d_enc, param_grads);

        nn::Tensor<T> d_em({b * n, d}), d_ep({b * n, d});
        for (std::size_t r = 0; r < b * n; ++r) {
            const T* src = d_tokens.ptr() + r * 2 * d;
            T* pm = d_em.ptr() + r * d;
            T* pp = d_ep.ptr() + r * d;
            for (std::size_t j = 0; j < d; ++j) pm[j] = src[j];
            for (std::size_t j = 0; j < d; ++j) pp[j] = src[d + j];
        }

        MovTInputGrads<T> grads;
        grads.d_velocity = motion_.backward(cache.motion, d_em, param_grads);
        grads.d_velocity.reshape({b, n, t, 3});
        grads.d_means = position_.backward(cache.position, d_ep, param_grads);
        grads.d_means.reshape({b, n, 2});
        return grads;
    }

  private:
    MovTConfig cfg_;
    TemporalEncoder<T> motion_;
    Mlp<T> position_;
    TransformerEncoder<T> encoder_;
    nn::Layer<T> pool_;
    nn::Layer<T> head_;
};

// ---------------------------------------------------------------------------
// PixT

template <typename T>
struct PixTCache {
    TemporalEncoderCache<T> patch;
    nn::LayerCache<T> proj;
    TransformerCache<T> encoder;
    nn::LayerCache<T> pool, head;
    std::size_t batch = 0, frames = 0;
};

template <typename T>
class PixTModel {
  public:
    explicit PixTModel(PixTConfig cfg)
        : cfg_((cfg.validate(), cfg)),
          patch_(cfg.patch_features(), cfg.embed_dim, cfg.mlp_depth, cfg.conv_kernel, "patch"),
          proj_(nn::LayerSpec::make_linear(cfg.embed_dim, cfg.token_dim()), "proj"),
          pos_table_("pos_table", {cfg.patches(), cfg.token_dim()}),
          encoder_(cfg.token_dim(), cfg.layers, cfg.heads, cfg.ff_expansion, cfg.dropout,
                   "encoder"),
          pool_(nn::LayerSpec::make_mean_pool(), "pool"),
          head_(nn::LayerSpec::make_linear(cfg.token_dim(), cfg.head_out()), "head") {}

    const PixTConfig& config() const { return cfg_; }
    std::string config_json() const { return pixt_config_to_json(cfg_); }

    void init(std::uint64_t seed) {
        Rng rng(seed);
        patch_.init(rng);
        proj_.init(rng);
        for (auto& v : pos_table_.value.data) v = static_cast<T>(rng.normal(0.0, 0.02));
        encoder_.init(rng);
        head_.init(rng);
    }

    std::vector<nn::Parameter<T>*> parameters() {
        std::vector<nn::Parameter<T>*> out;
        patch_.collect(out);
        for (auto& p : proj_.params()) out.push_back(&p);
        out.push_back(&pos_table_);
        encoder_.collect(out);
        for (auto& p : head_.params()) out.push_back(&p);
        return out;
    }

    // frames [B, T, H, W, 3] with values in [0, 1].
    ModelOutput<T> forward(const nn::Tensor<T>& frames, PixTCache<T>* cache,
                           Rng* dropout_rng) const {
        if (frames.shape.size() != 5 || frames.shape[4] != 3)
            throw ConfigError("frames must be [batch, frames, h, w, 3]");
        const std::size_t b = frames.shape[0], t = frames.shape[1];
        if (frames.shape[2] != cfg_.image_h || frames.shape[3] != cfg_.image_w)
            throw ConfigError("frame resolution disagrees with model config");
        const std::size_t p = cfg_.patches();

        nn::Tensor<T> patch_rows = extract_patches(frames);  // [B*P, T, pf]
        nn::Tensor<T> fea = patch_.forward(patch_rows, cache ? &cache->patch : nullptr);
        nn::Tensor<T> tokens = proj_.forward(fea, cache ? &cache->proj : nullptr);  // [B*P, 2D]
        tokens.reshape({b, p, cfg_.token_dim()});
        for (std::size_t bi = 0; bi < b; ++bi) {
            nn::kern::add_inplace(tokens.ptr() + bi * p * cfg_.token_dim(),
                                  pos_table_.value.ptr(), p * cfg_.token_dim());
        }

        nn::Tensor<T> enc =
            encoder_.forward(tokens, cache ? &cache->encoder : nullptr, dropout_rng);
        nn::Tensor<T> e_f = pool_.forward(enc, cache ? &cache->pool : nullptr);
        nn::Tensor<T> out = head_.forward(e_f, cache ? &cache->head : nullptr);
        if (cache) {
            cache->batch = b;
            cache->frames = t;
        }
        return {std::move(out), std::move(e_f)};
    }

    void backward(const PixTCache<T>& cache, const nn::Tensor<T>& d_output,
                  bool param_grads) const {
        const std::size_t b = cache.batch;
        const std::size_t p = cfg_.patches(), dim = cfg_.token_dim();
        nn::Tensor<T> d_ef = head_.backward(cache.head, d_output, param_grads);
        nn::Tensor<T> d_enc = pool_.backward(cache.pool, d_ef);
        nn::Tensor<T> d_tokens = encoder_.backward(cache.encoder, d_enc, param_grads);

        if (param_grads) {
            for (std::size_t bi = 0; bi < b; ++bi) {
                nn::kern::add_inplace(pos_table_.grad.ptr(), d_tokens.ptr() + bi * p * dim,
                                      p * dim);
            }
        }
        d_tokens.reshape({b * p, dim});
        nn::Tensor<T> d_fea = proj_.backward(cache.proj, d_tokens, param_grads);
        patch_.backward(cache.patch, d_fea, param_grads);
    }

  private:
    // [B, T, H, W, 3] -> [B*P, T, patch*patch*3]; patches row-major over the
    // patch grid, pixels row-major inside each patch.
    nn::Tensor<T> extract_patches(const nn::Tensor<T>& frames) const {
        const std::size_t b = frames.shape[0], t = frames.shape[1];
        const std::size_t h = cfg_.image_h, w = cfg_.image_w, ps = cfg_.patch;
        const std::size_t gy = h / ps, gx = w / ps, pf = cfg_.patch_features();
        nn::Tensor<T> out({b * gy * gx, t, pf});
        for (std::size_t bi = 0; bi < b; ++bi) {
            for (std::size_t py = 0; py < gy; ++py) {
                for (std::size_t px = 0; px < gx; ++px) {
                    const std::size_t row = (bi * gy + py) * gx + px;
                    for (std::size_t ti = 0; ti < t; ++ti) {
                        T* dst = out.ptr() + (row * t + ti) * pf;
                        const T* src = frames.ptr() + ((bi * t + ti) * h + py * ps) * w * 3;
                        for (std::size_t yy = 0; yy < ps; ++yy) {
                            const T* line = src + (yy * w + px * ps) * 3;
                            for (std::size_t xx = 0; xx < ps * 3; ++xx) {
                                dst[yy * ps * 3 + xx] = line[xx];
                            }
                        }
                    }
                }
            }
        }
        return out;
    }

    PixTConfig cfg_;
    TemporalEncoder<T> patch_;
    nn::Layer<T> proj_;
    nn::Parameter<T> pos_table_;
    TransformerEncoder<T> encoder_;
    nn::Layer<T> pool_;
    nn::Layer<T> head_;
};

// Single-clip inference on a normalized track set: derives velocity and mean
// positions, runs the model with batch size 1.
template <typename T>
ModelOutput<T> forward_tracks(const MovTModel<T>& model, const trackio::PointTrackSet& set) {
    if (!set.normalized) throw DataError("track set must be normalized before inference");
    const trackio::VelocityTensor vel = trackio::compute_velocity(set);
    const std::vector<float> means = trackio::mean_position(set);
    nn::Tensor<T> v({1, set.tracks, set.frames, 3});
    for (std::size_t i = 0; i < vel.values.size(); ++i) v.data[i] = static_cast<T>(vel.values[i]);
    nn::Tensor<T> m({1, set.tracks, 2});
    for (std::size_t i = 0; i < means.size(); ++i) m.data[i] = static_cast<T>(means[i]);
    return model.forward(v, m, nullptr, nullptr);
}

}  // namespace movt::model
