#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "movt/common.hpp"
#include "movt/kernels.hpp"
#include "movt/rng.hpp"
#include "movt/tensor.hpp"

namespace movt::nn {

enum class LayerKind {
    linear,
    conv1d,
    maxpool_time,
    layer_norm,
    mhsa,
    relu,
    mean_pool,
};

const char* layer_kind_name(LayerKind k);

// Dimension parameters for one layer. Only the fields a kind uses are read:
// linear (in, out), conv1d (in, out, kernel), layer_norm (features),
// mhsa (features = model dim, heads). The stateless kinds take no fields.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t kernel = 0;
    std::size_t features = 0;
    std::size_t heads = 0;

    void validate() const {
        switch (kind) {
            case LayerKind::linear:
                if (in == 0 || out == 0) throw ConfigError("linear: in/out must be positive");
                break;
            case LayerKind::conv1d:
                if (in == 0 || out == 0) throw ConfigError("conv1d: in/out must be positive");
                if (kernel == 0 || kernel % 2 == 0)
                    throw ConfigError("conv1d: kernel width must be odd and positive");
                break;
            case LayerKind::layer_norm:
                if (features == 0) throw ConfigError("layer_norm: features must be positive");
                break;
            case LayerKind::mhsa:
                if (features == 0 || heads == 0)
                    throw ConfigError("mhsa: features/heads must be positive");
                if (features % heads != 0)
                    throw ConfigError("mhsa: model dimension must be divisible by head count");
                break;
            default:
                break;
        }
    }

    static LayerSpec make_linear(std::size_t in, std::size_t out) {
        return {LayerKind::linear, in, out, 0, 0, 0};
    }
    static LayerSpec make_conv1d(std::size_t in, std::size_t out, std::size_t kernel) {
        return {LayerKind::conv1d, in, out, kernel, 0, 0};
    }
    static LayerSpec make_maxpool_time() { return {LayerKind::maxpool_time, 0, 0, 0, 0, 0}; }
    static LayerSpec make_layer_norm(std::size_t features) {
        return {LayerKind::layer_norm, 0, 0, 0, features, 0};
    }
    static LayerSpec make_mhsa(std::size_t dim, std::size_t heads) {
        return {LayerKind::mhsa, 0, 0, 0, dim, heads};
    }
    static LayerSpec make_relu() { return {LayerKind::relu, 0, 0, 0, 0, 0}; }
    static LayerSpec make_mean_pool() { return {LayerKind::mean_pool, 0, 0, 0, 0, 0}; }
};

// Learnable tensor with its gradient and AdamW moments. grad/m/v/step are
// mutable training state riding along with the immutable-once-trained value;
// grad mutation happens only under the single-writer training contract, which
// keeps const forward/backward passes safe to run concurrently on frozen
// models (saliency never accumulates into grad).
template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    mutable Tensor<T> grad;
    Tensor<T> m;
    Tensor<T> v;
    std::uint64_t step = 0;

    Parameter() = default;
    Parameter(std::string n, std::vector<std::size_t> shape)
        : name(std::move(n)), value(shape), grad(shape), m(shape), v(std::move(shape)) {}

    void zero_grad() const { grad.fill(T(0)); }
};

// Per-call forward context consumed by backward. Owning copies (not views)
// keep frozen-model forward passes reentrant.
template <typename T>
struct LayerCache {
    std::vector<std::size_t> in_shape;
    Tensor<T> x;                   // input (linear/conv1d/layer_norm/mhsa/relu)
    std::vector<std::uint32_t> argmax;  // maxpool_time
    Tensor<T> mean, rstd;          // layer_norm row stats
    Tensor<T> q, k, v;             // mhsa per-head blocks [B*H, N, d]
    Tensor<T> attn;                // mhsa attention weights [B*H, N, N]
    Tensor<T> ctx;                 // mhsa merged context [B*N, dim]
};

namespace detail {

template <typename T>
inline std::size_t rows_before_last(const Tensor<T>& t) {
    if (t.shape.empty()) throw ConfigError("rank-0 tensor");
    std::size_t rows = 1;
    for (std::size_t i = 0; i + 1 < t.shape.size(); ++i) rows *= t.shape[i];
    return rows;
}

}  // namespace detail

// One network layer: spec + parameters + forward/backward. The forward pass
// is const and writes all state into the caller's cache, so concurrent
// inference on a shared frozen model is safe. backward() accumulates into
// Parameter::grad only when requested.
template <typename T>
class Layer {
  public:
    Layer() = default;

    explicit Layer(LayerSpec spec, std::string name = {}) : spec_(spec), name_(std::move(name)) {
        spec_.validate();
        if (name_.empty()) name_ = layer_kind_name(spec_.kind);
        switch (spec_.kind) {
            case LayerKind::linear:
                params_.emplace_back(name_ + ".w", std::vector<std::size_t>{spec_.in, spec_.out});
                params_.emplace_back(name_ + ".b", std::vector<std::size_t>{spec_.out});
                break;
            case LayerKind::conv1d:
                params_.emplace_back(name_ + ".w",
                                     std::vector<std::size_t>{spec_.kernel, spec_.in, spec_.out});
                params_.emplace_back(name_ + ".b", std::vector<std::size_t>{spec_.out});
                break;
            case LayerKind::layer_norm:
                params_.emplace_back(name_ + ".gamma", std::vector<std::size_t>{spec_.features});
                params_.emplace_back(name_ + ".beta", std::vector<std::size_t>{spec_.features});
                break;
            case LayerKind::mhsa:
                params_.emplace_back(name_ + ".wqkv",
                                     std::vector<std::size_t>{spec_.features, 3 * spec_.features});
                params_.emplace_back(name_ + ".bqkv", std::vector<std::size_t>{3 * spec_.features});
                params_.emplace_back(name_ + ".wproj",
                                     std::vector<std::size_t>{spec_.features, spec_.features});
                params_.emplace_back(name_ + ".bproj", std::vector<std::size_t>{spec_.features});
                break;
            default:
                break;
        }
    }

    const LayerSpec& spec() const { return spec_; }
    const std::string& name() const { return name_; }
    std::vector<Parameter<T>>& params() { return params_; }
    const std::vector<Parameter<T>>& params() const { return params_; }

    // Fan-in uniform init for weights, zeros for biases, identity affine for
    // normalization. Consumes the rng in declaration order.
    void init(Rng& rng) {
        switch (spec_.kind) {
            case LayerKind::linear:
                init_uniform(params_[0].value, spec_.in, rng);
                break;
            case LayerKind::conv1d:
                init_uniform(params_[0].value, spec_.kernel * spec_.in, rng);
                break;
            case LayerKind::layer_norm:
                params_[0].value.fill(T(1));
                break;
            case LayerKind::mhsa:
                init_uniform(params_[0].value, spec_.features, rng);
                init_uniform(params_[2].value, spec_.features, rng);
                break;
            default:
                break;
        }
    }

    Tensor<T> forward(const Tensor<T>& x, LayerCache<T>* cache) const {
        Tensor<T> y = forward_impl(x, cache);
        if (!all_finite(y.ptr(), y.numel()))
            throw NumericFault("non-finite output of layer " + name_);
        return y;
    }

    // Returns d(loss)/d(input). Parameter gradients are accumulated only
    // when param_grads is true.
    Tensor<T> backward(const LayerCache<T>& cache, const Tensor<T>& dy,
                       bool param_grads = true) const {
        switch (spec_.kind) {
            case LayerKind::linear: return backward_linear(cache, dy, param_grads);
            case LayerKind::conv1d: return backward_conv1d(cache, dy, param_grads);
            case LayerKind::maxpool_time: return backward_maxpool(cache, dy);
            case LayerKind::layer_norm: return backward_layer_norm(cache, dy, param_grads);
            case LayerKind::mhsa: return backward_mhsa(cache, dy, param_grads);
            case LayerKind::relu: return backward_relu(cache, dy);
            case LayerKind::mean_pool: return backward_mean_pool(cache, dy);
        }
        throw ConfigError("unknown layer kind");
    }

  private:
    static void init_uniform(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (auto& v : w.data) v = static_cast<T>(rng.uniform(-bound, bound));
    }

    Tensor<T> forward_impl(const Tensor<T>& x, LayerCache<T>* cache) const {
        switch (spec_.kind) {
            case LayerKind::linear: return forward_linear(x, cache);
            case LayerKind::conv1d: return forward_conv1d(x, cache);
            case LayerKind::maxpool_time: return forward_maxpool(x, cache);
            case LayerKind::layer_norm: return forward_layer_norm(x, cache);
            case LayerKind::mhsa: return forward_mhsa(x, cache);
            case LayerKind::relu: return forward_relu(x, cache);
            case LayerKind::mean_pool: return forward_mean_pool(x, cache);
        }
        throw ConfigError("unknown layer kind");
    }

    Tensor<T> forward_linear(const Tensor<T>& x, LayerCache<T>* cache) const {
        if (x.shape.empty() || x.shape.back() != spec_.in)
            throw ConfigError(name_ + ": last input extent != in features");
        const std::size_t rows = detail::rows_before_last(x);
        auto out_shape = x.shape;
        out_shape.back() = spec_.out;
        Tensor<T> y(out_shape);
        kern::matmul_bias(x.ptr(), params_[0].value.ptr(), params_[1].value.ptr(), y.ptr(),
                          rows, spec_.in, spec_.out);
        if (cache) {
            cache->in_shape = x.shape;
            cache->x = x;
        }
        return y;
    }

    Tensor<T> backward_linear(const LayerCache<T>& cache, const Tensor<T>& dy,
                              bool param_grads) const {
        const std::size_t rows = detail::rows_before_last(cache.x);
        Tensor<T> dx(cache.in_shape);
        kern::matmul_nt(dy.ptr(), params_[0].value.ptr(), dx.ptr(), rows, spec_.out, spec_.in);
        if (param_grads) {
            kern::matmul_tn_acc(cache.x.ptr(), dy.ptr(), params_[0].grad.ptr(), rows, spec_.in,
                                spec_.out);
            kern::col_sum_acc(dy.ptr(), params_[1].grad.ptr(), rows, spec_.out);
        }
        return dx;
    }

    Tensor<T> forward_conv1d(const Tensor<T>& x, LayerCache<T>* cache) const {
        if (x.shape.size() != 3 || x.shape[2] != spec_.in)
            throw ConfigError(name_ + ": expects [rows, time, in]");
        const std::size_t rows = x.shape[0], t = x.shape[1];
        Tensor<T> y({rows, t, spec_.out});
        kern::conv1d_forward(x.ptr(), params_[0].value.ptr(), params_[1].value.ptr(), y.ptr(),
                             rows, t, spec_.in, spec_.out, spec_.kernel);
        if (cache) {
            cache->in_shape = x.shape;
            cache->x = x;
        }
        return y;
    }

    Tensor<T> backward_conv1d(const LayerCache<T>& cache, const Tensor<T>& dy,
                              bool param_grads) const {
        const std::size_t rows = cache.in_shape[0], t = cache.in_shape[1];
        Tensor<T> dx(cache.in_shape);
        kern::conv1d_backward_input(dy.ptr(), params_[0].value.ptr(), dx.ptr(), rows, t,
                                    spec_.in, spec_.out, spec_.kernel);
        if (param_grads) {
            kern::conv1d_backward_weight(cache.x.ptr(), dy.ptr(), params_[0].grad.ptr(),
                                         params_[1].grad.ptr(), rows, t, spec_.in, spec_.out,
                                         spec_.kernel);
        }
        return dx;
    }

    Tensor<T> forward_maxpool(const Tensor<T>& x, LayerCache<T>* cache) const {
        if (x.shape.size() != 3) throw ConfigError(name_ + ": expects [rows, time, ch]");
        const std::size_t rows = x.shape[0], t = x.shape[1], c = x.shape[2];
        Tensor<T> y({rows, c});
        std::vector<std::uint32_t> argmax(rows * c);
        kern::time_max_forward(x.ptr(), y.ptr(), argmax.data(), rows, t, c);
        if (cache) {
            cache->in_shape = x.shape;
            cache->argmax = std::move(argmax);
        }
        return y;
    }

    Tensor<T> backward_maxpool(const LayerCache<T>& cache, const Tensor<T>& dy) const {
        const std::size_t rows = cache.in_shape[0], t = cache.in_shape[1], c = cache.in_shape[2];
        Tensor<T> dx(cache.in_shape);
        kern::time_max_backward(dy.ptr(), cache.argmax.data(), dx.ptr(), rows, t, c);
        return dx;
    }

    Tensor<T> forward_layer_norm(const Tensor<T>& x, LayerCache<T>* cache) const {
        if (x.shape.empty() || x.shape.back() != spec_.features)
            throw ConfigError(name_ + ": last input extent != features");
        const std::size_t rows = detail::rows_before_last(x);
        Tensor<T> y(x.shape);
        Tensor<T> mean({rows}), rstd({rows});
        kern::layer_norm_forward(x.ptr(), params_[0].value.ptr(), params_[1].value.ptr(), y.ptr(),
                                 mean.ptr(), rstd.ptr(), rows, spec_.features, kEps);
        if (cache) {
            cache->in_shape = x.shape;
            cache->x = x;
            cache->mean = std::move(mean);
            cache->rstd = std::move(rstd);
        }
        return y;
    }

    Tensor<T> backward_layer_norm(const LayerCache<T>& cache, const Tensor<T>& dy,
                                  bool param_grads) const {
        const std::size_t rows = detail::rows_before_last(cache.x);
        Tensor<T> dx(cache.in_shape);
        kern::layer_norm_backward(cache.x.ptr(), params_[0].value.ptr(), dy.ptr(),
                                  cache.mean.ptr(), cache.rstd.ptr(), dx.ptr(),
                                  param_grads ? params_[0].grad.ptr() : nullptr,
                                  param_grads ? params_[1].grad.ptr() : nullptr, rows,
                                  spec_.features);
        return dx;
    }

    Tensor<T> forward_relu(const Tensor<T>& x, LayerCache<T>* cache) const {
        Tensor<T> y(x.shape);
        kern::relu_forward(x.ptr(), y.ptr(), x.numel());
        if (cache) {
            cache->in_shape = x.shape;
            cache->x = x;
        }
        return y;
    }

    Tensor<T> backward_relu(const LayerCache<T>& cache, const Tensor<T>& dy) const {
        Tensor<T> dx(cache.in_shape);
        kern::relu_backward(cache.x.ptr(), dy.ptr(), dx.ptr(), dx.numel());
        return dx;
    }

    Tensor<T> forward_mean_pool(const Tensor<T>& x, LayerCache<T>* cache) const {
        if (x.shape.size() != 3) throw ConfigError(name_ + ": expects [batch, tokens, ch]");
        const std::size_t b = x.shape[0], n = x.shape[1], c = x.shape[2];
        Tensor<T> y({b, c});
        kern::mean_tokens_forward(x.ptr(), y.ptr(), b, n, c);
        if (cache) cache->in_shape = x.shape;
        return y;
    }

    Tensor<T> backward_mean_pool(const LayerCache<T>& cache, const Tensor<T>& dy) const {
        const std::size_t b = cache.in_shape[0], n = cache.in_shape[1], c = cache.in_shape[2];
        Tensor<T> dx(cache.in_shape);
        kern::mean_tokens_backward(dy.ptr(), dx.ptr(), b, n, c);
        return dx;
    }

    Tensor<T> forward_mhsa(const Tensor<T>& x, LayerCache<T>* cache) const {
        if (x.shape.size() != 3 || x.shape[2] != spec_.features)
            throw ConfigError(name_ + ": expects [batch, tokens, dim]");
        const std::size_t b = x.shape[0], n = x.shape[1], dim = spec_.features;
        const std::size_t h = spec_.heads, d = dim / h;
        const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(d)));

        Tensor<T> qkv({b * n, 3 * dim});
        kern::matmul_bias(x.ptr(), params_[0].value.ptr(), params_[1].value.ptr(), qkv.ptr(),
                          b * n, dim, 3 * dim);
        Tensor<T> q({b * h, n, d}), k({b * h, n, d}), v({b * h, n, d});
        kern::split_qkv_heads(qkv.ptr(), q.ptr(), k.ptr(), v.ptr(), b, n, h, d);

        Tensor<T> attn({b * h, n, n});
        kern::batched_matmul_nt(q.ptr(), k.ptr(), attn.ptr(), b * h, n, d, n);
        kern::scale_inplace(attn.ptr(), scale, attn.numel());
        kern::softmax_forward(attn.ptr(), attn.ptr(), b * h * n, n);

        Tensor<T> ctxh({b * h, n, d});
        kern::batched_matmul(attn.ptr(), v.ptr(), ctxh.ptr(), b * h, n, n, d);
        Tensor<T> ctx({b * n, dim});
        kern::merge_heads(ctxh.ptr(), ctx.ptr(), b, n, h, d);

        Tensor<T> y({b, n, dim});
        kern::matmul_bias(ctx.ptr(), params_[2].value.ptr(), params_[3].value.ptr(), y.ptr(),
                          b * n, dim, dim);
        if (cache) {
            cache->in_shape = x.shape;
            cache->x = x;
            cache->q = std::move(q);
            cache->k = std::move(k);
            cache->v = std::move(v);
            cache->attn = std::move(attn);
            cache->ctx = std::move(ctx);
        }
        return y;
    }

    Tensor<T> backward_mhsa(const LayerCache<T>& cache, const Tensor<T>& dy,
                            bool param_grads) const {
        const std::size_t b = cache.in_shape[0], n = cache.in_shape[1], dim = spec_.features;
        const std::size_t h = spec_.heads, d = dim / h;
        const T scale = T(1) / static_cast<T>(std::sqrt(static_cast<double>(d)));

        Tensor<T> dctx({b * n, dim});
        kern::matmul_nt(dy.ptr(), params_[2].value.ptr(), dctx.ptr(), b * n, dim, dim);
        if (param_grads) {
            kern::matmul_tn_acc(cache.ctx.ptr(), dy.ptr(), params_[2].grad.ptr(), b * n, dim, dim);
            kern::col_sum_acc(dy.ptr(), params_[3].grad.ptr(), b * n, dim);
        }

        Tensor<T> dctxh({b * h, n, d});
        kern::split_heads(dctx.ptr(), dctxh.ptr(), b, n, h, d);

        Tensor<T> dattn({b * h, n, n});
        kern::batched_matmul_nt(dctxh.ptr(), cache.v.ptr(), dattn.ptr(), b * h, n, d, n);
        Tensor<T> dv({b * h, n, d});
        kern::batched_matmul_tn_acc(cache.attn.ptr(), dctxh.ptr(), dv.ptr(), b * h, n, n, d);

        Tensor<T> dscores({b * h, n, n});
        kern::softmax_backward(cache.attn.ptr(), dattn.ptr(), dscores.ptr(), b * h * n, n);
        kern::scale_inplace(dscores.ptr(), scale, dscores.numel());

        Tensor<T> dq({b * h, n, d});
        kern::batched_matmul(dscores.ptr(), cache.k.ptr(), dq.ptr(), b * h, n, n, d);
        Tensor<T> dk({b * h, n, d});
        kern::batched_matmul_tn_acc(dscores.ptr(), cache.q.ptr(), dk.ptr(), b * h, n, n, d);

        Tensor<T> dqkv({b * n, 3 * dim});
        kern::merge_qkv_heads(dq.ptr(), dk.ptr(), dv.ptr(), dqkv.ptr(), b, n, h, d);

        Tensor<T> dx(cache.in_shape);
        kern::matmul_nt(dqkv.ptr(), params_[0].value.ptr(), dx.ptr(), b * n, 3 * dim, dim);
        if (param_grads) {
            kern::matmul_tn_acc(cache.x.ptr(), dqkv.ptr(), params_[0].grad.ptr(), b * n, dim,
                                3 * dim);
            kern::col_sum_acc(dqkv.ptr(), params_[1].grad.ptr(), b * n, 3 * dim);
        }
        return dx;
    }

    static constexpr T kEps = T(1e-5);

    LayerSpec spec_;
    std::string name_;
    std::vector<Parameter<T>> params_;
};

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::linear: return "linear";
        case LayerKind::conv1d: return "conv1d";
        case LayerKind::maxpool_time: return "maxpool_time";
        case LayerKind::layer_norm: return "layer_norm";
        case LayerKind::mhsa: return "mhsa";
        case LayerKind::relu: return "relu";
        case LayerKind::mean_pool: return "mean_pool";
    }
    return "unknown";
}

}  // namespace movt::nn
