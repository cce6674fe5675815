#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

// Serial reference kernels. These are the ground truth the parallel kernels
// in kernels.hpp are tested and benchmarked against. Both variants assign
// every output element a fixed serial reduction order, so they agree to the
// last bit; keep them in sync when adding kernels.

namespace movt::nn::ref {

// C[M,N] = A[M,K] * B[K,N] (+ bias[N] per row when bias != nullptr).
template <typename T>
void matmul_bias(const T* a, const T* b, const T* bias, T* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * n;
        if (bias) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = bias[j];
        } else {
            for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
        }
        const T* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[M,N] = A[M,K] * B[N,K]^T.
template <typename T>
void matmul_nt(const T* a, const T* b, T* c,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * k;
        T* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const T* brow = b + j * k;
            T acc = T(0);
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

// C[K,N] += A[M,K]^T * B[M,N]. Gradient of a linear weight.
template <typename T>
void matmul_tn_acc(const T* a, const T* b, T* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        T* crow = c + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const T av = a[i * k + p];
            const T* brow = b + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// out[N] += sum over rows of A[M,N]. Gradient of a broadcast bias.
template <typename T>
void col_sum_acc(const T* a, T* out, std::size_t m, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        T acc = T(0);
        for (std::size_t i = 0; i < m; ++i) acc += a[i * n + j];
        out[j] += acc;
    }
}

// Batched C[b] = A[b] * B[b], blocks [M,K] x [K,N].
template <typename T>
void batched_matmul(const T* a, const T* b, T* c, std::size_t batch,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t blk = 0; blk < batch; ++blk) {
        matmul_bias<T>(a + blk * m * k, b + blk * k * n, nullptr, c + blk * m * n, m, k, n);
    }
}

// Batched C[b] = A[b] * B[b]^T, blocks [M,K] x [N,K].
template <typename T>
void batched_matmul_nt(const T* a, const T* b, T* c, std::size_t batch,
                       std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t blk = 0; blk < batch; ++blk) {
        matmul_nt<T>(a + blk * m * k, b + blk * n * k, c + blk * m * n, m, k, n);
    }
}

// Batched C[b] += A[b]^T * B[b], blocks [M,K] x [M,N].
template <typename T>
void batched_matmul_tn_acc(const T* a, const T* b, T* c, std::size_t batch,
                           std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t blk = 0; blk < batch; ++blk) {
        matmul_tn_acc<T>(a + blk * m * k, b + blk * m * n, c + blk * k * n, m, k, n);
    }
}

// Temporal convolution, stride 1, zero padding, odd kernel width.
// x[R,T,Cin], w[K,Cin,Cout], bias[Cout] -> y[R,T,Cout].
template <typename T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y,
                    std::size_t rows, std::size_t t, std::size_t cin,
                    std::size_t cout, std::size_t kw) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kw - 1) / 2;
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x + r * t * cin;
        T* yr = y + r * t * cout;
        for (std::size_t ti = 0; ti < t; ++ti) {
            T* yo = yr + ti * cout;
            if (bias) {
                for (std::size_t o = 0; o < cout; ++o) yo[o] = bias[o];
            } else {
                for (std::size_t o = 0; o < cout; ++o) yo[o] = T(0);
            }
            for (std::size_t dk = 0; dk < kw; ++dk) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(ti) +
                                           static_cast<std::ptrdiff_t>(dk) - off;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
                const T* xi = xr + static_cast<std::size_t>(src) * cin;
                const T* wk = w + dk * cin * cout;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    const T xv = xi[ci];
                    const T* wrow = wk + ci * cout;
                    for (std::size_t o = 0; o < cout; ++o) yo[o] += xv * wrow[o];
                }
            }
        }
    }
}

// dx[R,T,Cin] += correlation of dy with the flipped kernel.
template <typename T>
void conv1d_backward_input(const T* dy, const T* w, T* dx,
                           std::size_t rows, std::size_t t, std::size_t cin,
                           std::size_t cout, std::size_t kw) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kw - 1) / 2;
    for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy + r * t * cout;
        T* dxr = dx + r * t * cin;
        for (std::size_t ti = 0; ti < t; ++ti) {
            const T* dyo = dyr + ti * cout;
            for (std::size_t dk = 0; dk < kw; ++dk) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(ti) +
                                           static_cast<std::ptrdiff_t>(dk) - off;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
                T* dxi = dxr + static_cast<std::size_t>(src) * cin;
                const T* wk = w + dk * cin * cout;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    const T* wrow = wk + ci * cout;
                    T acc = T(0);
                    for (std::size_t o = 0; o < cout; ++o) acc += dyo[o] * wrow[o];
                    dxi[ci] += acc;
                }
            }
        }
    }
}

// dw[K,Cin,Cout] += sum over rows and time; dbias[Cout] += sum of dy.
template <typename T>
void conv1d_backward_weight(const T* x, const T* dy, T* dw, T* dbias,
                            std::size_t rows, std::size_t t, std::size_t cin,
                            std::size_t cout, std::size_t kw) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kw - 1) / 2;
    for (std::size_t dk = 0; dk < kw; ++dk) {
        for (std::size_t ci = 0; ci < cin; ++ci) {
            T* dwrow = dw + (dk * cin + ci) * cout;
            for (std::size_t r = 0; r < rows; ++r) {
                const T* xr = x + r * t * cin;
                const T* dyr = dy + r * t * cout;
                for (std::size_t ti = 0; ti < t; ++ti) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(ti) +
                                               static_cast<std::ptrdiff_t>(dk) - off;
                    if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
                    const T xv = xr[static_cast<std::size_t>(src) * cin + ci];
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
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

// Max over the time axis. x[R,T,C] -> y[R,C]; argmax[R,C] records the first
// maximizing step so backward routing and ties are reproducible.
template <typename T>
void time_max_forward(const T* x, T* y, std::uint32_t* argmax,
                      std::size_t rows, std::size_t t, std::size_t c) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x + r * t * c;
        T* yr = y + r * c;
        std::uint32_t* ar = argmax + r * c;
        for (std::size_t j = 0; j < c; ++j) {
            T best = xr[j];
            std::uint32_t bi = 0;
            for (std::size_t ti = 1; ti < t; ++ti) {
                const T v = xr[ti * c + j];
                if (v > best) {
                    best = v;
                    bi = static_cast<std::uint32_t>(ti);
                }
            }
            yr[j] = best;
            ar[j] = bi;
        }
    }
}

template <typename T>
void time_max_backward(const T* dy, const std::uint32_t* argmax, T* dx,
                       std::size_t rows, std::size_t t, std::size_t c) {
    for (std::size_t i = 0; i < rows * t * c; ++i) dx[i] = T(0);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy + r * c;
        const std::uint32_t* ar = argmax + r * c;
        T* dxr = dx + r * t * c;
        for (std::size_t j = 0; j < c; ++j) dxr[ar[j] * c + j] = dyr[j];
    }
}

// Row-wise normalization with affine output. mean/rstd are cached per row
// for the backward pass.
template <typename T>
void layer_norm_forward(const T* x, const T* gamma, const T* beta, T* y,
                        T* mean, T* rstd, std::size_t rows, std::size_t c, T eps) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x + r * c;
        T* yr = y + r * c;
        T mu = T(0);
        for (std::size_t j = 0; j < c; ++j) mu += xr[j];
        mu /= static_cast<T>(c);
        T var = T(0);
        for (std::size_t j = 0; j < c; ++j) {
            const T d = xr[j] - mu;
            var += d * d;
        }
        var /= static_cast<T>(c);
        const T rs = T(1) / std::sqrt(var + eps);
        mean[r] = mu;
        rstd[r] = rs;
        for (std::size_t j = 0; j < c; ++j) yr[j] = (xr[j] - mu) * rs * gamma[j] + beta[j];
    }
}

template <typename T>
void layer_norm_backward(const T* x, const T* gamma, const T* dy,
                         const T* mean, const T* rstd, T* dx, T* dgamma, T* dbeta,
                         std::size_t rows, std::size_t c) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x + r * c;
        const T* dyr = dy + r * c;
        T* dxr = dx + r * c;
        const T mu = mean[r];
        const T rs = rstd[r];
        T sum1 = T(0), sum2 = T(0);
        for (std::size_t j = 0; j < c; ++j) {
            const T xhat = (xr[j] - mu) * rs;
            const T dxhat = dyr[j] * gamma[j];
            sum1 += dxhat;
            sum2 += dxhat * xhat;
        }
        const T inv_c = T(1) / static_cast<T>(c);
        for (std::size_t j = 0; j < c; ++j) {
            const T xhat = (xr[j] - mu) * rs;
            const T dxhat = dyr[j] * gamma[j];
            dxr[j] = rs * (dxhat - (sum1 + xhat * sum2) * inv_c);
        }
    }
    if (dgamma && dbeta) {
        for (std::size_t j = 0; j < c; ++j) {
            T dg = T(0), db = T(0);
            for (std::size_t r = 0; r < rows; ++r) {
                const T xhat = (x[r * c + j] - mean[r]) * rstd[r];
                dg += dy[r * c + j] * xhat;
                db += dy[r * c + j];
            }
            dgamma[j] += dg;
            dbeta[j] += db;
        }
    }
}

// Row-wise softmax with the usual max-shift for stability.
template <typename T>
void softmax_forward(const T* x, T* y, std::size_t rows, std::size_t c) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x + r * c;
        T* yr = y + r * c;
        T mx = xr[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, xr[j]);
        T sum = T(0);
        for (std::size_t j = 0; j < c; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            sum += yr[j];
        }
        const T inv = T(1) / sum;
        for (std::size_t j = 0; j < c; ++j) yr[j] *= inv;
    }
}

template <typename T>
void softmax_backward(const T* y, const T* dy, T* dx, std::size_t rows, std::size_t c) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* yr = y + r * c;
        const T* dyr = dy + r * c;
        T* dxr = dx + r * c;
        T dot = T(0);
        for (std::size_t j = 0; j < c; ++j) dot += yr[j] * dyr[j];
        for (std::size_t j = 0; j < c; ++j) dxr[j] = yr[j] * (dyr[j] - dot);
    }
}

// Mean over the middle axis. x[B,N,C] -> y[B,C].
template <typename T>
void mean_tokens_forward(const T* x, T* y, std::size_t b, std::size_t n, std::size_t c) {
    const T inv = T(1) / static_cast<T>(n);
    for (std::size_t bi = 0; bi < b; ++bi) {
        const T* xb = x + bi * n * c;
        T* yb = y + bi * c;
        for (std::size_t j = 0; j < c; ++j) yb[j] = T(0);
        for (std::size_t t = 0; t < n; ++t) {
            const T* xt = xb + t * c;
            for (std::size_t j = 0; j < c; ++j) yb[j] += xt[j];
        }
        for (std::size_t j = 0; j < c; ++j) yb[j] *= inv;
    }
}

template <typename T>
void mean_tokens_backward(const T* dy, T* dx, std::size_t b, std::size_t n, std::size_t c) {
    const T inv = T(1) / static_cast<T>(n);
    for (std::size_t bi = 0; bi < b; ++bi) {
        const T* dyb = dy + bi * c;
        T* dxb = dx + bi * n * c;
        for (std::size_t t = 0; t < n; ++t) {
            T* dxt = dxb + t * c;
            for (std::size_t j = 0; j < c; ++j) dxt[j] = dyb[j] * inv;
        }
    }
}

// Scatter packed attention inputs [B*N, 3*H*D] (q | k | v per row) into
// three per-head blocks [B*H, N, D].
template <typename T>
void split_qkv_heads(const T* x, T* q, T* k, T* v, std::size_t b, std::size_t n,
                     std::size_t h, std::size_t d) {
    const std::size_t hd = h * d;
    for (std::size_t bi = 0; bi < b; ++bi) {
        for (std::size_t ni = 0; ni < n; ++ni) {
            const T* row = x + (bi * n + ni) * 3 * hd;
            for (std::size_t hi = 0; hi < h; ++hi) {
                const std::size_t dst = ((bi * h + hi) * n + ni) * d;
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

// Inverse of split_qkv_heads, gathering head gradients back into packed rows.
template <typename T>
void merge_qkv_heads(const T* q, const T* k, const T* v, T* y, std::size_t b,
                     std::size_t n, std::size_t h, std::size_t d) {
    const std::size_t hd = h * d;
    for (std::size_t bi = 0; bi < b; ++bi) {
        for (std::size_t ni = 0; ni < n; ++ni) {
            T* row = y + (bi * n + ni) * 3 * hd;
            for (std::size_t hi = 0; hi < h; ++hi) {
                const std::size_t src = ((bi * h + hi) * n + ni) * d;
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

// Interleave [B*N, H*D] rows into per-head blocks [B*H, N, D].
template <typename T>
void split_heads(const T* x, T* y, std::size_t b, std::size_t n,
                 std::size_t h, std::size_t d) {
    for (std::size_t bi = 0; bi < b; ++bi) {
        for (std::size_t ni = 0; ni < n; ++ni) {
            const T* src = x + (bi * n + ni) * h * d;
            for (std::size_t hi = 0; hi < h; ++hi) {
                T* dst = y + ((bi * h + hi) * n + ni) * d;
                const T* s = src + hi * d;
                for (std::size_t j = 0; j < d; ++j) dst[j] = s[j];
            }
        }
    }
}

template <typename T>
void merge_heads(const T* x, T* y, std::size_t b, std::size_t n,
                 std::size_t h, std::size_t d) {
    for (std::size_t bi = 0; bi < b; ++bi) {
        for (std::size_t ni = 0; ni < n; ++ni) {
            T* dst = y + (bi * n + ni) * h * d;
            for (std::size_t hi = 0; hi < h; ++hi) {
                const T* src = x + ((bi * h + hi) * n + ni) * d;
                T* s = dst + hi * d;
                for (std::size_t j = 0; j < d; ++j) s[j] = src[j];
            }
        }
    }
}

template <typename T>
void add_inplace(T* y, const T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

template <typename T>
void scale_inplace(T* y, T s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= s;
}

// Inverted dropout given a precomputed keep mask.
template <typename T>
void apply_mask(const T* x, const std::uint8_t* keep, T inv_keep_prob, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = keep[i] ? x[i] * inv_keep_prob : T(0);
}

}  // namespace movt::nn::ref
