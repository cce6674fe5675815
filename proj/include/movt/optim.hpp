#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "movt/common.hpp"
#include "movt/layers.hpp"

namespace movt::nn {

struct AdamwConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// One decoupled-weight-decay Adam step with bias correction. Gradients are
// zeroed afterwards so accumulation always starts clean.
template <typename T>
void adamw_step(const std::vector<Parameter<T>*>& params, const AdamwConfig& cfg) {
    for (Parameter<T>* p : params) {
        p->step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        const std::size_t n = p->value.numel();
        for (std::size_t i = 0; i < n; ++i) {
            const double g = static_cast<double>(p->grad.data[i]);
            const double m = cfg.beta1 * static_cast<double>(p->m.data[i]) + (1.0 - cfg.beta1) * g;
            const double v =
                cfg.beta2 * static_cast<double>(p->v.data[i]) + (1.0 - cfg.beta2) * g * g;
            p->m.data[i] = static_cast<T>(m);
            p->v.data[i] = static_cast<T>(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            const double w = static_cast<double>(p->value.data[i]);
            p->value.data[i] = static_cast<T>(
                w - cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * w));
        }
        p->zero_grad();
    }
}

// Scales all gradients so the global L2 norm never exceeds max_norm.
// Returns the applied scale (1 when no clipping happened). The norm is
// reduced serially in parameter order for bit-reproducibility.
template <typename T>
double clip_grad_norm(const std::vector<Parameter<T>*>& params, double max_norm) {
    if (max_norm <= 0) throw ConfigError("clip_grad_norm: max_norm must be positive");
    double sq = 0;
    for (const Parameter<T>* p : params) {
        for (const T g : p->grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0) return 1.0;
    const double scale = max_norm / norm;
    for (Parameter<T>* p : params) {
        for (T& g : p->grad.data) g = static_cast<T>(static_cast<double>(g) * scale);
    }
    return scale;
}

// Reduce-on-plateau schedule over a minimized validation metric. The first
// observation seeds the baseline; afterwards, `patience` consecutive
// non-improving observations (improvement = drop by more than min_delta)
// multiply the rate by `factor`.
class PlateauScheduler {
  public:
    struct Config {
        double factor = 0.1;
        int patience = 5;
        double min_delta = 1e-4;
        double min_lr = 0.0;
    };

    PlateauScheduler(double initial_lr, Config cfg) : lr_(initial_lr), cfg_(cfg) {
        if (cfg.factor <= 0 || cfg.factor >= 1)
            throw ConfigError("plateau scheduler: factor must be in (0, 1)");
        if (cfg.patience < 1) throw ConfigError("plateau scheduler: patience must be >= 1");
    }

    double step(double metric) {
        if (!seen_any_) {
            seen_any_ = true;
            best_ = metric;
            return lr_;
        }
        if (metric < best_ - cfg_.min_delta) {
            best_ = metric;
            bad_count_ = 0;
        } else {
            bad_count_ += 1;
            if (bad_count_ >= cfg_.patience) {
                lr_ = std::max(lr_ * cfg_.factor, cfg_.min_lr);
                bad_count_ = 0;
            }
        }
        return lr_;
    }

    double lr() const { return lr_; }

  private:
    double lr_;
    Config cfg_;
    double best_ = 0;
    int bad_count_ = 0;
    bool seen_any_ = false;
};

}  // namespace movt::nn
