#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "movt/common.hpp"
#include "movt/tensor.hpp"

namespace movt::nn {

// Mean softmax cross-entropy over the batch. If dlogits is non-null it
// receives (softmax - onehot) / B. Serial on purpose: B*C is tiny and a fixed
// summation order keeps losses bit-reproducible.
template <typename T>
T cross_entropy(const Tensor<T>& logits, const std::vector<std::size_t>& labels,
                Tensor<T>* dlogits) {
    if (logits.shape.size() != 2) throw ConfigError("cross_entropy: logits must be [B, C]");
    const std::size_t b = logits.shape[0], c = logits.shape[1];
    if (labels.size() != b) throw ConfigError("cross_entropy: label count != batch size");
    if (dlogits) *dlogits = Tensor<T>({b, c});
    T loss = T(0);
    for (std::size_t i = 0; i < b; ++i) {
        if (labels[i] >= c) throw DataError("cross_entropy: label out of range");
        const T* row = logits.ptr() + i * c;
        T mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
        const T log_sum = std::log(sum) + mx;
        loss += log_sum - row[labels[i]];
        if (dlogits) {
            T* drow = dlogits->ptr() + i * c;
            const T inv_b = T(1) / static_cast<T>(b);
            for (std::size_t j = 0; j < c; ++j) {
                drow[j] = std::exp(row[j] - log_sum) * inv_b;
            }
            drow[labels[i]] -= inv_b;
        }
    }
    loss /= static_cast<T>(b);
    if (!std::isfinite(loss)) throw NumericFault("cross_entropy produced non-finite loss");
    return loss;
}

// Mean squared error over all elements; gradient 2(pred - target)/count.
template <typename T>
T mse(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>* dpred) {
    if (pred.shape != target.shape) throw ConfigError("mse: shape mismatch");
    const std::size_t n = pred.numel();
    if (n == 0) throw ConfigError("mse: empty tensors");
    if (dpred) *dpred = Tensor<T>(pred.shape);
    T loss = T(0);
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const T d = pred.data[i] - target.data[i];
        loss += d * d;
        if (dpred) dpred->data[i] = T(2) * d * inv_n;
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) throw NumericFault("mse produced non-finite loss");
    return loss;
}

// Row-wise softmax to probabilities, for prediction records and aggregation.
template <typename T>
std::vector<double> softmax_probs(const T* logits, std::size_t c) {
    std::vector<double> p(c);
    double mx = logits[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max<double>(mx, logits[j]);
    double sum = 0;
    for (std::size_t j = 0; j < c; ++j) {
        p[j] = std::exp(static_cast<double>(logits[j]) - mx);
        sum += p[j];
    }
    for (std::size_t j = 0; j < c; ++j) p[j] /= sum;
    return p;
}

}  // namespace movt::nn
