#include "movt/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "movt/checkpoint.hpp"
#include "movt/infer.hpp"
#include "movt/losses.hpp"
#include "movt/rng.hpp"

namespace movt::train {

const char* loss_name(LossKind k) {
    return k == LossKind::cross_entropy ? "cross_entropy" : "mse";
}

LossKind parse_loss(const std::string& name) {
    if (name == "cross_entropy") return LossKind::cross_entropy;
    if (name == "mse") return LossKind::mse;
    throw ConfigError("unknown loss kind: '" + name + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    // lr = 0 is a valid no-update run (optimizer state still advances).
    if (lr < 0) throw ConfigError("learning rate must be non-negative");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(max_norm > 0)) throw ConfigError("gradient clip max_norm must be positive");
    if (weight_decay < 0) throw ConfigError("weight decay must be non-negative");
    // The scheduler constructor validates its own fields.
    nn::PlateauScheduler probe(lr, plateau);
    (void)probe;
}

namespace {

// Model-specific batch assembly and autodiff entry points; everything else in
// the training loop is shared.
struct MovTFeeder {
    using Model = model::MovTModel<float>;
    using Cache = model::MovTCache<float>;

    static model::ModelOutput<float> forward(const Model& m, const data::Dataset& ds,
                                             const std::vector<std::size_t>& batch,
                                             Cache* cache, Rng* dropout) {
        nn::Tensor<float> vel({batch.size(), ds.tracks, ds.frames, 3});
        nn::Tensor<float> means({batch.size(), ds.tracks, 2});
        const std::size_t sv = ds.tracks * ds.frames * 3, sm = ds.tracks * 2;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto& v = ds.velocity[batch[b]];
            const auto& mp = ds.means[batch[b]];
            std::copy(v.data.begin(), v.data.end(), vel.data.begin() + b * sv);
            std::copy(mp.data.begin(), mp.data.end(), means.data.begin() + b * sm);
        }
        return m.forward(vel, means, cache, dropout);
    }

    static void backward(const Model& m, const Cache& cache, const nn::Tensor<float>& dout) {
        (void)m.backward(cache, dout, /*param_grads=*/true);
    }
};

struct PixTFeeder {
    using Model = model::PixTModel<float>;
    using Cache = model::PixTCache<float>;

    static model::ModelOutput<float> forward(const Model& m, const data::Dataset& ds,
                                             const std::vector<std::size_t>& batch,
                                             Cache* cache, Rng* dropout) {
        if (ds.pixels.empty()) throw DataError("dataset was loaded without frame volumes");
        nn::Tensor<float> px({batch.size(), ds.frames, ds.image_h, ds.image_w, 3});
        const std::size_t sp = ds.frames * ds.image_h * ds.image_w * 3;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const auto& p = ds.pixels[batch[b]];
            std::copy(p.data.begin(), p.data.end(), px.data.begin() + b * sp);
        }
        return m.forward(px, cache, dropout);
    }

    static void backward(const Model& m, const Cache& cache, const nn::Tensor<float>& dout) {
        m.backward(cache, dout, /*param_grads=*/true);
    }
};

struct LossOutcome {
    float loss = 0;
    nn::Tensor<float> dout;
};

LossOutcome apply_loss(const TrainConfig& cfg, const data::Dataset& ds,
                       const std::vector<std::size_t>& batch, const nn::Tensor<float>& out,
                       bool want_grad) {
    LossOutcome r;
    if (cfg.loss == LossKind::cross_entropy) {
        std::vector<std::size_t> labels(batch.size());
        for (std::size_t b = 0; b < batch.size(); ++b) labels[b] = ds.labels[batch[b]];
        r.loss = nn::cross_entropy(out, labels, want_grad ? &r.dout : nullptr);
    } else {
        const std::size_t k = ds.targets.front().size();
        nn::Tensor<float> target({batch.size(), k});
        for (std::size_t b = 0; b < batch.size(); ++b)
            std::copy(ds.targets[batch[b]].begin(), ds.targets[batch[b]].end(),
                      target.data.begin() + b * k);
        r.loss = nn::mse(out, target, want_grad ? &r.dout : nullptr);
    }
    return r;
}

template <typename Feeder>
std::pair<double, double> validate_pass(const typename Feeder::Model& m, const TrainConfig& cfg,
                                        const data::Dataset& ds,
                                        const std::vector<std::size_t>& val) {
    double loss_sum = 0;
    std::size_t correct = 0;
    double sq_err = 0;
    std::size_t sq_count = 0;
    for (std::size_t lo = 0; lo < val.size(); lo += cfg.batch_size) {
        const std::size_t hi = std::min(val.size(), lo + cfg.batch_size);
        std::vector<std::size_t> batch(val.begin() + lo, val.begin() + hi);
        const auto out = Feeder::forward(m, ds, batch, nullptr, nullptr);
        const auto lo_res = apply_loss(cfg, ds, batch, out.output, false);
        loss_sum += static_cast<double>(lo_res.loss) * static_cast<double>(batch.size());
        const std::size_t c = out.output.shape[1];
        for (std::size_t b = 0; b < batch.size(); ++b) {
            if (cfg.loss == LossKind::cross_entropy) {
                std::size_t arg = 0;
                for (std::size_t j = 1; j < c; ++j)
                    if (out.output.data[b * c + j] > out.output.data[b * c + arg]) arg = j;
                correct += arg == ds.labels[batch[b]];
            } else {
                for (std::size_t j = 0; j < c; ++j) {
                    const double d = static_cast<double>(out.output.data[b * c + j]) -
                                     static_cast<double>(ds.targets[batch[b]][j]);
                    sq_err += d * d;
                    ++sq_count;
                }
            }
        }
    }
    const double val_loss = loss_sum / static_cast<double>(val.size());
    const double metric = cfg.loss == LossKind::cross_entropy
                              ? static_cast<double>(correct) / static_cast<double>(val.size())
                              : std::sqrt(sq_err / static_cast<double>(sq_count));
    return {val_loss, metric};
}

template <typename T>
std::vector<nn::Tensor<T>> snapshot_params(std::vector<nn::Parameter<T>*> params) {
    std::vector<nn::Tensor<T>> snap;
    snap.reserve(params.size());
    for (auto* p : params) snap.push_back(p->value);
    return snap;
}

template <typename T>
void restore_params(std::vector<nn::Parameter<T>*> params,
                    const std::vector<nn::Tensor<T>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

template <typename Feeder>
TrainReport run_training(typename Feeder::Model& m, const data::Dataset& ds,
                         const data::SplitIndices& split, const TrainConfig& cfg) {
    cfg.validate();
    if (split.train.empty()) throw DataError("training split is empty");
    if (split.val.empty()) throw DataError("validation split is empty");
    const bool classification = m.config().head == model::HeadKind::classification;
    if (classification != (cfg.loss == LossKind::cross_entropy))
        throw ConfigError("loss kind does not match the model head");
    if (classification && !ds.regression && ds.classes > m.config().head_out())
        throw DataError("dataset has more classes than the model head");
    if (classification == ds.regression)
        throw DataError("dataset label kind does not match the model head");

    const auto t0 = std::chrono::steady_clock::now();
    const Rng root(cfg.seed);
    Rng dropout = root.derive(1);

    nn::AdamwConfig opt;
    opt.lr = cfg.lr;
    opt.weight_decay = cfg.weight_decay;
    nn::PlateauScheduler sched(cfg.lr, cfg.plateau);
    auto params = m.parameters();

    TrainReport report;
    std::vector<nn::Tensor<float>> best_weights;
    double best_val = 0;
    bool have_best = false;
    std::string ckpt_abs;
    if (!cfg.run_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(std::filesystem::path(cfg.run_dir) / "checkpoints",
                                            ec);
        if (ec) throw IoError("cannot create checkpoint directory: " + ec.message());
        report.checkpoint_path = "checkpoints/best.ckpt";
        ckpt_abs = (std::filesystem::path(cfg.run_dir) / report.checkpoint_path).string();
    }

    std::vector<std::size_t> order = split.train;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng = root.derive(1000 + epoch);
        shuffle_rng.shuffle(order);
        double loss_sum = 0;
        std::size_t batch_index = 0;
        for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size, ++batch_index) {
            const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
            std::vector<std::size_t> batch(order.begin() + lo, order.begin() + hi);
            try {
                typename Feeder::Cache cache;
                const auto out = Feeder::forward(m, ds, batch, &cache, &dropout);
                auto lr_res = apply_loss(cfg, ds, batch, out.output, true);
                loss_sum += static_cast<double>(lr_res.loss) * static_cast<double>(batch.size());
                Feeder::backward(m, cache, lr_res.dout);
                nn::clip_grad_norm(params, cfg.max_norm);
                nn::adamw_step(params, opt);
            } catch (const NumericFault& f) {
                throw NumericFault("epoch " + std::to_string(epoch) + " batch " +
                                   std::to_string(batch_index) + ": " + f.what());
            }
        }
        const double train_loss = loss_sum / static_cast<double>(order.size());
        const auto [val_loss, val_metric] = validate_pass<Feeder>(m, cfg, ds, split.val);

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_loss;
        rec.val_loss = val_loss;
        rec.val_metric = val_metric;
        rec.lr = opt.lr;
        report.epochs.push_back(rec);

        if (!have_best || val_loss < best_val) {
            have_best = true;
            best_val = val_loss;
            report.best_epoch = epoch;
            report.best_val_loss = val_loss;
            best_weights = snapshot_params(params);
            if (!ckpt_abs.empty()) save_checkpoint(m, ckpt_abs);
        }
        opt.lr = sched.step(val_loss);
    }

    restore_params(params, best_weights);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace

TrainReport train_movt(model::MovTModel<float>& m, const data::Dataset& ds,
                       const data::SplitIndices& split, const TrainConfig& cfg) {
    return run_training<MovTFeeder>(m, ds, split, cfg);
}

TrainReport train_pixt(model::PixTModel<float>& m, const data::Dataset& ds,
                       const data::SplitIndices& split, const TrainConfig& cfg) {
    return run_training<PixTFeeder>(m, ds, split, cfg);
}

std::string train_report_to_json(const TrainReport& r, bool include_timing) {
    nlohmann::json j;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : r.epochs) {
        nlohmann::json je;
        je["epoch"] = e.epoch;
        je["train_loss"] = e.train_loss;
        je["val_loss"] = e.val_loss;
        je["val_metric"] = e.val_metric;
        je["lr"] = e.lr;
        j["epochs"].push_back(je);
    }
    j["best_epoch"] = r.best_epoch;
    j["best_val_loss"] = r.best_val_loss;
    j["checkpoint_path"] = r.checkpoint_path;
    if (include_timing) j["wall_seconds"] = r.wall_seconds;
    return j.dump(2) + "\n";
}

ClipAggregate aggregate_clips(const std::vector<std::vector<double>>& clip_probs) {
    if (clip_probs.empty()) throw DataError("no clip probabilities to aggregate");
    const std::size_t c = clip_probs.front().size();
    if (c == 0) throw DataError("empty probability vector");
    ClipAggregate agg;
    agg.probs.assign(c, 0.0);
    for (const auto& p : clip_probs) {
        if (p.size() != c) throw DataError("clip probability vectors differ in width");
        double sum = 0;
        for (double v : p) sum += v;
        if (std::abs(sum - 1.0) > 1e-5)
            throw DataError("clip probabilities sum to " + std::to_string(sum));
        for (std::size_t j = 0; j < c; ++j) agg.probs[j] += p[j];
    }
    for (double& v : agg.probs) v /= static_cast<double>(clip_probs.size());
    agg.predicted = 0;
    for (std::size_t j = 1; j < c; ++j)
        if (agg.probs[j] > agg.probs[agg.predicted]) agg.predicted = j;
    return agg;
}

ProbeResult linear_probe(const model::MovTModel<float>& frozen, const data::Dataset& ds,
                         const data::SplitIndices& split, std::uint64_t seed,
                         std::size_t epochs, double lr) {
    if (frozen.config().head != model::HeadKind::classification || ds.regression)
        throw ConfigError("linear probing requires a classification model and dataset");
    if (split.train.empty() || split.test.empty())
        throw DataError("probing needs non-empty train and test splits");

    const auto train_out = infer::movt_infer(frozen, ds, split.train);
    const auto test_out = infer::movt_infer(frozen, ds, split.test);
    const std::size_t dim = train_out.embeddings.shape[1];

    nn::Layer<float> head(nn::LayerSpec::make_linear(dim, ds.classes));
    const Rng root(seed);
    Rng init_rng = root.derive(0);
    head.init(init_rng);
    std::vector<nn::Parameter<float>*> params;
    for (auto& p : head.params()) params.push_back(&p);

    nn::AdamwConfig opt;
    opt.lr = lr;
    opt.weight_decay = 0.0;

    std::vector<std::size_t> order(split.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t batch_size = 32;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        Rng shuffle_rng = root.derive(1000 + epoch);
        shuffle_rng.shuffle(order);
        for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
            const std::size_t hi = std::min(order.size(), lo + batch_size);
            nn::Tensor<float> x({hi - lo, dim});
            std::vector<std::size_t> labels(hi - lo);
            for (std::size_t b = lo; b < hi; ++b) {
                std::copy(train_out.embeddings.data.begin() + order[b] * dim,
                          train_out.embeddings.data.begin() + (order[b] + 1) * dim,
                          x.data.begin() + (b - lo) * dim);
                labels[b - lo] = ds.labels[split.train[order[b]]];
            }
            nn::LayerCache<float> cache;
            const auto logits = head.forward(x, &cache);
            nn::Tensor<float> dlogits;
            (void)nn::cross_entropy(logits, labels, &dlogits);
            (void)head.backward(cache, dlogits, true);
            nn::clip_grad_norm(params, 1.0);
            nn::adamw_step(params, opt);
        }
    }

    std::size_t correct = 0;
    const std::size_t c = ds.classes;
    nn::Tensor<float> xt({split.test.size(), dim});
    std::copy(test_out.embeddings.data.begin(), test_out.embeddings.data.end(),
              xt.data.begin());
    const auto logits = head.forward(xt, nullptr);
    for (std::size_t i = 0; i < split.test.size(); ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < c; ++j)
            if (logits.data[i * c + j] > logits.data[i * c + arg]) arg = j;
        correct += arg == ds.labels[split.test[i]];
    }

    ProbeResult r;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
    r.embed_dim = dim;
    r.classes = c;
    return r;
}

}  // namespace movt::train
