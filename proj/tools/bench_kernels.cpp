// Timing harness comparing the OpenMP kernels against the serial reference,
// verifying bitwise-identical outputs on every shape it times. Shapes mirror
// what one training step of the default track model actually dispatches.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "movt/kernels.hpp"
#include "movt/kernels_ref.hpp"
#include "movt/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using movt::Rng;

double seconds_per_call(const std::function<void()>& fn, std::size_t min_calls) {
    using clock = std::chrono::steady_clock;
    fn();  // warm-up, also primes the OpenMP thread pool
    std::size_t calls = 0;
    const auto start = clock::now();
    do {
        fn();
        ++calls;
    } while (calls < min_calls ||
             std::chrono::duration<double>(clock::now() - start).count() < 0.2);
    return std::chrono::duration<double>(clock::now() - start).count() /
           static_cast<double>(calls);
}

std::vector<float> random_vec(std::size_t n, Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

int g_failures = 0;

void report(const std::string& name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %9.3f us   parallel %9.3f us   speedup %5.2fx   %s\n",
                name.c_str(), serial_s * 1e6, parallel_s * 1e6, serial_s / parallel_s,
                identical ? "bitwise-identical" : "MISMATCH");
    if (!identical) ++g_failures;
}

// One transformer block worth of dense algebra at the default scale:
// B=32 clips, N=60 tokens, token dim 256.
void bench_matmul(Rng& rng) {
    const std::size_t m = 32 * 60, k = 256, n = 256;
    const auto a = random_vec(m * k, rng);
    const auto b = random_vec(k * n, rng);
    const auto bias = random_vec(n, rng);
    std::vector<float> ys(m * n), yp(m * n);

    const double ts = seconds_per_call(
        [&] { movt::nn::ref::matmul_bias(a.data(), b.data(), bias.data(), ys.data(), m, k, n); },
        3);
    const double tp = seconds_per_call(
        [&] { movt::nn::kern::matmul_bias(a.data(), b.data(), bias.data(), yp.data(), m, k, n); },
        3);
    report("matmul_bias 1920x256x256", ts, tp, bitwise_equal(ys, yp));
}

// Attention score blocks: B*H = 128 batches of 60 x 64 times 64 x 60.
void bench_batched_matmul(Rng& rng) {
    const std::size_t batch = 128, m = 60, k = 64, n = 60;
    const auto a = random_vec(batch * m * k, rng);
    const auto b = random_vec(batch * k * n, rng);
    std::vector<float> ys(batch * m * n), yp(batch * m * n);

    const double ts = seconds_per_call(
        [&] { movt::nn::ref::batched_matmul(a.data(), b.data(), ys.data(), batch, m, k, n); }, 3);
    const double tp = seconds_per_call(
        [&] { movt::nn::kern::batched_matmul(a.data(), b.data(), yp.data(), batch, m, k, n); }, 3);
    report("batched_matmul 128x60x64x60", ts, tp, bitwise_equal(ys, yp));
}

// Motion-branch temporal convolution: 32 clips x 60 tracks, T=32, D=128.
void bench_conv1d(Rng& rng) {
    const std::size_t rows = 32 * 60, t = 32, cin = 128, cout = 128, kw = 3;
    const auto x = random_vec(rows * t * cin, rng);
    const auto w = random_vec(kw * cin * cout, rng);
    const auto bias = random_vec(cout, rng);
    std::vector<float> ys(rows * t * cout), yp(rows * t * cout);

    const double ts = seconds_per_call(
        [&] {
            movt::nn::ref::conv1d_forward(x.data(), w.data(), bias.data(), ys.data(), rows, t,
                                          cin, cout, kw);
        },
        2);
    const double tp = seconds_per_call(
        [&] {
            movt::nn::kern::conv1d_forward(x.data(), w.data(), bias.data(), yp.data(), rows, t,
                                           cin, cout, kw);
        },
        2);
    report("conv1d 1920x32 128->128 k3", ts, tp, bitwise_equal(ys, yp));
}

void bench_layer_norm(Rng& rng) {
    const std::size_t rows = 32 * 60, c = 256;
    const auto x = random_vec(rows * c, rng);
    const auto gamma = random_vec(c, rng);
    const auto beta = random_vec(c, rng);
    std::vector<float> ys(rows * c), yp(rows * c);
    std::vector<float> mean_s(rows), rstd_s(rows), mean_p(rows), rstd_p(rows);
    const float eps = 1e-5f;

    const double ts = seconds_per_call(
        [&] {
            movt::nn::ref::layer_norm_forward(x.data(), gamma.data(), beta.data(), ys.data(),
                                              mean_s.data(), rstd_s.data(), rows, c, eps);
        },
        5);
    const double tp = seconds_per_call(
        [&] {
            movt::nn::kern::layer_norm_forward(x.data(), gamma.data(), beta.data(), yp.data(),
                                               mean_p.data(), rstd_p.data(), rows, c, eps);
        },
        5);
    report("layer_norm 1920x256", ts, tp,
           bitwise_equal(ys, yp) && bitwise_equal(mean_s, mean_p) && bitwise_equal(rstd_s, rstd_p));
}

void bench_softmax(Rng& rng) {
    const std::size_t rows = 128 * 60, c = 60;
    const auto x = random_vec(rows * c, rng);
    std::vector<float> ys(rows * c), yp(rows * c);

    const double ts = seconds_per_call(
        [&] { movt::nn::ref::softmax_forward(x.data(), ys.data(), rows, c); }, 5);
    const double tp = seconds_per_call(
        [&] { movt::nn::kern::softmax_forward(x.data(), yp.data(), rows, c); }, 5);
    report("softmax 7680x60", ts, tp, bitwise_equal(ys, yp));
}

void bench_time_max(Rng& rng) {
    const std::size_t rows = 32 * 60, t = 32, c = 128;
    const auto x = random_vec(rows * t * c, rng);
    std::vector<float> ys(rows * c), yp(rows * c);
    std::vector<std::uint32_t> as(rows * c), ap(rows * c);

    const double ts = seconds_per_call(
        [&] { movt::nn::ref::time_max_forward(x.data(), ys.data(), as.data(), rows, t, c); }, 5);
    const double tp = seconds_per_call(
        [&] { movt::nn::kern::time_max_forward(x.data(), yp.data(), ap.data(), rows, t, c); }, 5);
    report("time_max 1920x32x128", ts, tp, bitwise_equal(ys, yp) && as == ap);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel namespace runs serially\n\n");
#endif
    Rng rng(7);
    bench_matmul(rng);
    bench_batched_matmul(rng);
    bench_conv1d(rng);
    bench_layer_norm(rng);
    bench_softmax(rng);
    bench_time_max(rng);
    if (g_failures) {
        std::printf("\n%d kernel(s) diverged from the serial reference\n", g_failures);
        return 1;
    }
    std::printf("\nall outputs bitwise-identical to the serial reference\n");
    return 0;
}
