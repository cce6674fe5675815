#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "movt/kernels_ref.hpp"

// OpenMP-parallel kernels. Every parallel loop ranges over output elements
// (rows, blocks, or columns) and each element is produced by exactly one
// thread with a serial inner reduction, so results are bitwise identical to
// the serial reference in kernels_ref.hpp for any thread count. That
// equivalence is enforced by tests and measured by the movt-bench target.

namespace movt::nn::kern {

template <typename T>
void matmul_bias(const T* a, const T* b, const T* bias, T* c,
                 std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        T* crow = c + static_cast<std::size_t>(i) * n;
        if (bias) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = bias[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
        }
        const T* arow = a + static_cast<std::size_t>(i) * k;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c,
               std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) {
            const T* brow = b + j * k;
            T acc = T(0);
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

template <typename T>
void matmul_tn_acc(const T* a, const T* b, T* c,
                   std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(k); ++p) {
        T* crow = c + static_cast<std::size_t>(p) * n;
        for (std::size_t i = 0; i < m; ++i) {
            const T av = a[i * k + static_cast<std::size_t>(p)];
            const T* brow = b + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void col_sum_acc(const T* a, T* out, std::size_t m, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(n); ++j) {
        T acc = T(0);
        for (std::size_t i = 0; i < m; ++i) acc += a[i * n + static_cast<std::size_t>(j)];
        out[j] += acc;
    }
}

template <typename T>
void batched_matmul(const T* a, const T* b, T* c, std::size_t batch,
                    std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(batch); ++blk) {
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            const T* ab = a + static_cast<std::size_t>(blk) * m * k;
            const T* bb = b + static_cast<std::size_t>(blk) * k * n;
            T* crow = c + (static_cast<std::size_t>(blk) * m + static_cast<std::size_t>(i)) * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
            const T* arow = ab + static_cast<std::size_t>(i) * k;
            for (std::size_t p = 0; p < k; ++p) {
                const T av = arow[p];
                const T* brow = bb + p * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    }
}

template <typename T>
void batched_matmul_nt(const T* a, const T* b, T* c, std::size_t batch,
                       std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(batch); ++blk) {
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            const T* arow = a + static_cast<std::size_t>(blk) * m * k +
                            static_cast<std::size_t>(i) * k;
            const T* bb = b + static_cast<std::size_t>(blk) * n * k;
            T* crow = c + (static_cast<std::size_t>(blk) * m + static_cast<std::size_t>(i)) * n;
            for (std::size_t j = 0; j < n; ++j) {
                const T* brow = bb + j * k;
                T acc = T(0);
                for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
                crow[j] = acc;
            }
        }
    }
}

template <typename T>
void batched_matmul_tn_acc(const T* a, const T* b, T* c, std::size_t batch,
                           std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(batch); ++blk) {
        for (std::int64_t p = 0; p < static_cast<std::int64_t>(k); ++p) {
            const T* ab = a + static_cast<std::size_t>(blk) * m * k;
            const T* bb = b + static_cast<std::size_t>(blk) * m * n;
            T* crow = c + static_cast<std::size_t>(blk) * k * n +
                      static_cast<std::size_t>(p) * n;
            for (std::size_t i = 0; i < m; ++i) {
                const T av = ab[i * k + static_cast<std::size_t>(p)];
                const T* brow = bb + i * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    }
}

template <typename T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y,
                    std::size_t rows, std::size_t t, std::size_t cin,
                    std::size_t cout, std::size_t kw) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::conv1d_forward<T>(x + static_cast<std::size_t>(r) * t * cin, w, bias,
                               y + static_cast<std::size_t>(r) * t * cout, 1, t, cin, cout, kw);
    }
}

template <typename T>
void conv1d_backward_input(const T* dy, const T* w, T* dx,
                           std::size_t rows, std::size_t t, std::size_t cin,
                           std::size_t cout, std::size_t kw) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::conv1d_backward_input<T>(dy + static_cast<std::size_t>(r) * t * cout, w,
                                      dx + static_cast<std::size_t>(r) * t * cin,
                                      1, t, cin, cout, kw);
    }
}

template <typename T>
void conv1d_backward_weight(const T* x, const T* dy, T* dw, T* dbias,
                            std::size_t rows, std::size_t t, std::size_t cin,
                            std::size_t cout, std::size_t kw) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kw - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t dk = 0; dk < static_cast<std::int64_t>(kw); ++dk) {
        for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(cin); ++ci) {
            T* dwrow = dw + (static_cast<std::size_t>(dk) * cin + static_cast<std::size_t>(ci)) * cout;
            for (std::size_t r = 0; r < rows; ++r) {
                const T* xr = x + r * t * cin;
                const T* dyr = dy + r * t * cout;
                for (std::size_t ti = 0; ti < t; ++ti) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(ti) + dk - off;
                    if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
                    const T xv = xr[static_cast<std::size_t>(src) * cin + static_cast<std::size_t>(ci)];
                    const T* dyo = dyr + ti * cout;
                    for (std::size_t o = 0; o < cout; ++o) dwrow[o] += xv * dyo[o];
                }
            }
        }
    }
    if (dbias) col_sum_acc<T>(dy, dbias, rows * t, cout);
}

template <typename T>
void relu_forward(const T* x, T* y, std::size_t n) {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        y[i] = x[i] > T(0) ? x[i] : T(0);
    }
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        dx[i] = x[i] > T(0) ? dy[i] : T(0);
    }
}

template <typename T>
void time_max_forward(const T* x, T* y, std::uint32_t* argmax,
                      std::size_t rows, std::size_t t, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::time_max_forward<T>(x + static_cast<std::size_t>(r) * t * c,
                                 y + static_cast<std::size_t>(r) * c,
                                 argmax + static_cast<std::size_t>(r) * c, 1, t, c);
    }
}

template <typename T>
void time_max_backward(const T* dy, const std::uint32_t* argmax, T* dx,
                       std::size_t rows, std::size_t t, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::time_max_backward<T>(dy + static_cast<std::size_t>(r) * c,
                                  argmax + static_cast<std::size_t>(r) * c,
                                  dx + static_cast<std::size_t>(r) * t * c, 1, t, c);
    }
}

template <typename T>
void layer_norm_forward(const T* x, const T* gamma, const T* beta, T* y,
                        T* mean, T* rstd, std::size_t rows, std::size_t c, T eps) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::layer_norm_forward<T>(x + static_cast<std::size_t>(r) * c, gamma, beta,
                                   y + static_cast<std::size_t>(r) * c,
                                   mean + r, rstd + r, 1, c, eps);
    }
}

template <typename T>
void layer_norm_backward(const T* x, const T* gamma, const T* dy,
                         const T* mean, const T* rstd, T* dx, T* dgamma, T* dbeta,
                         std::size_t rows, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::layer_norm_backward<T>(x + static_cast<std::size_t>(r) * c, gamma,
                                    dy + static_cast<std::size_t>(r) * c, mean + r, rstd + r,
                                    dx + static_cast<std::size_t>(r) * c, nullptr, nullptr, 1, c);
    }
    if (dgamma && dbeta) {
#pragma omp parallel for schedule(static)
        for (std::int64_t j = 0; j < static_cast<std::int64_t>(c); ++j) {
            T dg = T(0), db = T(0);
            for (std::size_t r = 0; r < rows; ++r) {
                const T xhat = (x[r * c + static_cast<std::size_t>(j)] - mean[r]) * rstd[r];
                dg += dy[r * c + static_cast<std::size_t>(j)] * xhat;
                db += dy[r * c + static_cast<std::size_t>(j)];
            }
            dgamma[j] += dg;
            dbeta[j] += db;
        }
    }
}

template <typename T>
void softmax_forward(const T* x, T* y, std::size_t rows, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::softmax_forward<T>(x + static_cast<std::size_t>(r) * c,
                                y + static_cast<std::size_t>(r) * c, 1, c);
    }
}

template <typename T>
void softmax_backward(const T* y, const T* dy, T* dx, std::size_t rows, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        ref::softmax_backward<T>(y + static_cast<std::size_t>(r) * c,
                                 dy + static_cast<std::size_t>(r) * c,
                                 dx + static_cast<std::size_t>(r) * c, 1, c);
    }
}

template <typename T>
void mean_tokens_forward(const T* x, T* y, std::size_t b, std::size_t n, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(b); ++bi) {
        ref::mean_tokens_forward<T>(x + static_cast<std::size_t>(bi) * n * c,
                                    y + static_cast<std::size_t>(bi) * c, 1, n, c);
    }
}

template <typename T>
void mean_tokens_backward(const T* dy, T* dx, std::size_t b, std::size_t n, std::size_t c) {
#pragma omp parallel for schedule(static)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(b); ++bi) {
        ref::mean_tokens_backward<T>(dy + static_cast<std::size_t>(bi) * c,
                                     dx + static_cast<std::size_t>(bi) * n * c, 1, n, c);
    }
}

template <typename T>
void split_qkv_heads(const T* x, T* q, T* k, T* v, std::size_t b, std::size_t n,
                     std::size_t h, std::size_t d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(b); ++bi) {
        for (std::int64_t ni = 0; ni < static_cast<std::int64_t>(n); ++ni) {
            const std::size_t hd = h * d;
            const T* row = x + (static_cast<std::size_t>(bi) * n + static_cast<std::size_t>(ni)) * 3 * hd;
            for (std::size_t hi = 0; hi < h; ++hi) {
                const std::size_t dst = ((static_cast<std::size_t>(bi) * h + hi) * n +
                                         static_cast<std::size_t>(ni)) * d;
                const T* qs = row + hi * d;
                const T* ks = row + hd + hi * d;
                const T* vs = row + 2 * hd + hi * d;
                for (std::size_t j = 0; j < d; ++j) {
                    q[dst + j] = qs[j];
                    k[dst + j] = ks[j];
                    v[dst + j] = vs[j];
                }
            }
        }
    }
}

template <typename T>
void merge_qkv_heads(const T* q, const T* k, const T* v, T* y, std::size_t b,
                     std::size_t n, std::size_t h, std::size_t d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(b); ++bi) {
        for (std::int64_t ni = 0; ni < static_cast<std::int64_t>(n); ++ni) {
            const std::size_t hd = h * d;
            T* row = y + (static_cast<std::size_t>(bi) * n + static_cast<std::size_t>(ni)) * 3 * hd;
            for (std::size_t hi = 0; hi < h; ++hi) {
                const std::size_t src = ((static_cast<std::size_t>(bi) * h + hi) * n +
                                         static_cast<std::size_t>(ni)) * d;
                T* qd = row + hi * d;
                T* kd = row + hd + hi * d;
                T* vd = row + 2 * hd + hi * d;
                for (std::size_t j = 0; j < d; ++j) {
                    qd[j] = q[src + j];
                    kd[j] = k[src + j];
                    vd[j] = v[src + j];
                }
            }
        }
    }
}

template <typename T>
void split_heads(const T* x, T* y, std::size_t b, std::size_t n,
                 std::size_t h, std::size_t d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(b); ++bi) {
        for (std::int64_t ni = 0; ni < static_cast<std::int64_t>(n); ++ni) {
            const T* src = x + (static_cast<std::size_t>(bi) * n + static_cast<std::size_t>(ni)) * h * d;
            for (std::size_t hi = 0; hi < h; ++hi) {
                T* dst = y + ((static_cast<std::size_t>(bi) * h + hi) * n +
                              static_cast<std::size_t>(ni)) * d;
                const T* s = src + hi * d;
                for (std::size_t j = 0; j < d; ++j) dst[j] = s[j];
            }
        }
    }
}

template <typename T>
void merge_heads(const T* x, T* y, std::size_t b, std::size_t n,
                 std::size_t h, std::size_t d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(b); ++bi) {
        for (std::int64_t ni = 0; ni < static_cast<std::int64_t>(n); ++ni) {
            T* dst = y + (static_cast<std::size_t>(bi) * n + static_cast<std::size_t>(ni)) * h * d;
            for (std::size_t hi = 0; hi < h; ++hi) {
                const T* src = x + ((static_cast<std::size_t>(bi) * h + hi) * n +
                                    static_cast<std::size_t>(ni)) * d;
                T* s = dst + hi * d;
                for (std::size_t j = 0; j < d; ++j) s[j] = src[j];
            }
        }
    }
}

template <typename T>
void add_inplace(T* y, const T* x, std::size_t n) {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) y[i] += x[i];
}

template <typename T>
void scale_inplace(T* y, T s, std::size_t n) {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) y[i] *= s;
}

template <typename T>
void apply_mask(const T* x, const std::uint8_t* keep, T inv_keep_prob, T* y, std::size_t n) {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        y[i] = keep[i] ? x[i] * inv_keep_prob : T(0);
    }
}

}  // namespace movt::nn::kern
