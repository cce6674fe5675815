#include <doctest.h>

#include <vector>

#include "movt/kernels.hpp"
#include "movt/rng.hpp"
#include "support/test_util.hpp"

// The parallel kernels must agree with the serial reference bit-for-bit:
// both apply the same per-output-element reduction order, so any divergence
// is a bug, not rounding.

using movt::Rng;
namespace kern = movt::nn::kern;
namespace ref = movt::nn::ref;

namespace {

std::vector<float> random_vec(std::size_t n, Rng& rng) {
    std::vector<float> v(n);
    testutil::fill_uniform(v.data(), n, rng);
    return v;
}

}  // namespace

TEST_CASE("matmul against a hand example") {
    // [1 2; 3 4] * [5 6; 7 8] + bias [10, 20]
    const std::vector<float> a{1, 2, 3, 4}, b{5, 6, 7, 8}, bias{10, 20};
    std::vector<float> c(4);
    kern::matmul_bias(a.data(), b.data(), bias.data(), c.data(), 2, 2, 2);
    CHECK(c == std::vector<float>{29, 42, 53, 70});
}

TEST_CASE("parallel kernels match the serial reference bitwise") {
    Rng rng(42);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t m = 1 + rng.next_below(17);
        const std::size_t k = 1 + rng.next_below(13);
        const std::size_t n = 1 + rng.next_below(19);

        const auto a = random_vec(m * k, rng);
        const auto b = random_vec(k * n, rng);
        const auto bt = random_vec(n * k, rng);
        const auto bias = random_vec(n, rng);

        SUBCASE("") {}  // keep one loop body, plain checks below

        std::vector<float> c1(m * n), c2(m * n);
        kern::matmul_bias(a.data(), b.data(), bias.data(), c1.data(), m, k, n);
        ref::matmul_bias(a.data(), b.data(), bias.data(), c2.data(), m, k, n);
        CHECK(testutil::bitwise_equal(c1, c2));

        kern::matmul_nt(a.data(), bt.data(), c1.data(), m, k, n);
        ref::matmul_nt(a.data(), bt.data(), c2.data(), m, k, n);
        CHECK(testutil::bitwise_equal(c1, c2));

        std::vector<float> g1(k * n, 0.5f), g2(k * n, 0.5f);
        const auto dy = random_vec(m * n, rng);
        kern::matmul_tn_acc(a.data(), dy.data(), g1.data(), m, k, n);
        ref::matmul_tn_acc(a.data(), dy.data(), g2.data(), m, k, n);
        CHECK(testutil::bitwise_equal(g1, g2));

        std::vector<float> s1(n, 0.25f), s2(n, 0.25f);
        kern::col_sum_acc(dy.data(), s1.data(), m, n);
        ref::col_sum_acc(dy.data(), s2.data(), m, n);
        CHECK(testutil::bitwise_equal(s1, s2));
    }
}

TEST_CASE("batched matmul variants match the reference bitwise") {
    Rng rng(43);
    const std::size_t batch = 5, m = 7, k = 6, n = 8;
    const auto a = random_vec(batch * m * k, rng);
    const auto b = random_vec(batch * k * n, rng);
    const auto bt = random_vec(batch * n * k, rng);
    const auto dyn = random_vec(batch * m * n, rng);

    std::vector<float> c1(batch * m * n), c2(batch * m * n);
    kern::batched_matmul(a.data(), b.data(), c1.data(), batch, m, k, n);
    ref::batched_matmul(a.data(), b.data(), c2.data(), batch, m, k, n);
    CHECK(testutil::bitwise_equal(c1, c2));

    kern::batched_matmul_nt(a.data(), bt.data(), c1.data(), batch, m, k, n);
    ref::batched_matmul_nt(a.data(), bt.data(), c2.data(), batch, m, k, n);
    CHECK(testutil::bitwise_equal(c1, c2));

    std::vector<float> g1(batch * k * n, 0.0f), g2(batch * k * n, 0.0f);
    kern::batched_matmul_tn_acc(a.data(), dyn.data(), g1.data(), batch, m, k, n);
    ref::batched_matmul_tn_acc(a.data(), dyn.data(), g2.data(), batch, m, k, n);
    CHECK(testutil::bitwise_equal(g1, g2));
}

TEST_CASE("conv1d kernels match the reference bitwise") {
    Rng rng(44);
    const std::size_t rows = 9, t = 12, cin = 5, cout = 7, kw = 3;
    const auto x = random_vec(rows * t * cin, rng);
    const auto w = random_vec(kw * cin * cout, rng);
    const auto bias = random_vec(cout, rng);
    const auto dy = random_vec(rows * t * cout, rng);

    std::vector<float> y1(rows * t * cout), y2(rows * t * cout);
    kern::conv1d_forward(x.data(), w.data(), bias.data(), y1.data(), rows, t, cin, cout, kw);
    ref::conv1d_forward(x.data(), w.data(), bias.data(), y2.data(), rows, t, cin, cout, kw);
    CHECK(testutil::bitwise_equal(y1, y2));

    std::vector<float> dx1(rows * t * cin, 0.0f), dx2(rows * t * cin, 0.0f);
    kern::conv1d_backward_input(dy.data(), w.data(), dx1.data(), rows, t, cin, cout, kw);
    ref::conv1d_backward_input(dy.data(), w.data(), dx2.data(), rows, t, cin, cout, kw);
    CHECK(testutil::bitwise_equal(dx1, dx2));

    std::vector<float> dw1(kw * cin * cout, 0.0f), dw2(kw * cin * cout, 0.0f);
    std::vector<float> db1(cout, 0.0f), db2(cout, 0.0f);
    kern::conv1d_backward_weight(x.data(), dy.data(), dw1.data(), db1.data(), rows, t, cin,
                                 cout, kw);
    ref::conv1d_backward_weight(x.data(), dy.data(), dw2.data(), db2.data(), rows, t, cin,
                                cout, kw);
    CHECK(testutil::bitwise_equal(dw1, dw2));
    CHECK(testutil::bitwise_equal(db1, db2));
}

TEST_CASE("conv1d with a centered identity tap copies the input") {
    const std::size_t t = 6;
    std::vector<float> x{1, 2, 3, 4, 5, 6};
    const std::vector<float> w{0, 1, 0};  // taps at offsets -1, 0, +1
    std::vector<float> y(t);
    ref::conv1d_forward(x.data(), w.data(), static_cast<const float*>(nullptr), y.data(), 1,
                        t, 1, 1, 3);
    CHECK(y == x);
}

TEST_CASE("row-wise kernels match the reference bitwise") {
    Rng rng(45);
    const std::size_t rows = 11, t = 9, c = 6;
    const auto x = random_vec(rows * t * c, rng);
    const auto dy = random_vec(rows * c, rng);

    std::vector<std::uint32_t> am1(rows * c), am2(rows * c);
    std::vector<float> y1(rows * c), y2(rows * c);
    kern::time_max_forward(x.data(), y1.data(), am1.data(), rows, t, c);
    ref::time_max_forward(x.data(), y2.data(), am2.data(), rows, t, c);
    CHECK(testutil::bitwise_equal(y1, y2));
    CHECK(am1 == am2);

    std::vector<float> dx1(rows * t * c), dx2(rows * t * c);
    kern::time_max_backward(dy.data(), am1.data(), dx1.data(), rows, t, c);
    ref::time_max_backward(dy.data(), am2.data(), dx2.data(), rows, t, c);
    CHECK(testutil::bitwise_equal(dx1, dx2));

    const auto flat = random_vec(rows * c, rng);
    const auto gamma = random_vec(c, rng);
    const auto beta = random_vec(c, rng);
    std::vector<float> ln1(rows * c), ln2(rows * c), m1(rows), m2(rows), r1(rows), r2(rows);
    kern::layer_norm_forward(flat.data(), gamma.data(), beta.data(), ln1.data(), m1.data(),
                             r1.data(), rows, c, 1e-5f);
    ref::layer_norm_forward(flat.data(), gamma.data(), beta.data(), ln2.data(), m2.data(),
                            r2.data(), rows, c, 1e-5f);
    CHECK(testutil::bitwise_equal(ln1, ln2));
    CHECK(testutil::bitwise_equal(m1, m2));

    const auto dln = random_vec(rows * c, rng);
    std::vector<float> dxa(rows * c), dxb(rows * c), dg1(c, 0.0f), dg2(c, 0.0f), db1(c, 0.0f),
        db2(c, 0.0f);
    kern::layer_norm_backward(flat.data(), gamma.data(), dln.data(), m1.data(), r1.data(),
                              dxa.data(), dg1.data(), db1.data(), rows, c);
    ref::layer_norm_backward(flat.data(), gamma.data(), dln.data(), m2.data(), r2.data(),
                             dxb.data(), dg2.data(), db2.data(), rows, c);
    CHECK(testutil::bitwise_equal(dxa, dxb));
    CHECK(testutil::bitwise_equal(dg1, dg2));
    CHECK(testutil::bitwise_equal(db1, db2));

    std::vector<float> sm1(rows * c), sm2(rows * c);
    kern::softmax_forward(flat.data(), sm1.data(), rows, c);
    ref::softmax_forward(flat.data(), sm2.data(), rows, c);
    CHECK(testutil::bitwise_equal(sm1, sm2));

    std::vector<float> dsm1(rows * c), dsm2(rows * c);
    kern::softmax_backward(sm1.data(), dln.data(), dsm1.data(), rows, c);
    ref::softmax_backward(sm2.data(), dln.data(), dsm2.data(), rows, c);
    CHECK(testutil::bitwise_equal(dsm1, dsm2));
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(46);
    const std::size_t rows = 50, c = 9;
    const auto x = random_vec(rows * c, rng);
    std::vector<float> y(rows * c);
    kern::softmax_forward(x.data(), y.data(), rows, c);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0;
        for (std::size_t j = 0; j < c; ++j) s += y[r * c + j];
        CHECK(std::abs(s - 1.0) < 1e-6);
    }
}

TEST_CASE("head split and merge round-trip") {
    Rng rng(47);
    const std::size_t b = 3, n = 5, h = 2, d = 4;
    const auto x = random_vec(b * n * h * d, rng);
    std::vector<float> split(b * h * n * d), merged(b * n * h * d);

    kern::split_heads(x.data(), split.data(), b, n, h, d);
    std::vector<float> split_ref(b * h * n * d);
    ref::split_heads(x.data(), split_ref.data(), b, n, h, d);
    CHECK(testutil::bitwise_equal(split, split_ref));

    kern::merge_heads(split.data(), merged.data(), b, n, h, d);
    CHECK(testutil::bitwise_equal(merged, x));

    const auto packed = random_vec(b * n * 3 * h * d, rng);
    std::vector<float> q(b * h * n * d), k(b * h * n * d), v(b * h * n * d);
    std::vector<float> qr(b * h * n * d), kr(b * h * n * d), vr(b * h * n * d);
    kern::split_qkv_heads(packed.data(), q.data(), k.data(), v.data(), b, n, h, d);
    ref::split_qkv_heads(packed.data(), qr.data(), kr.data(), vr.data(), b, n, h, d);
    CHECK(testutil::bitwise_equal(q, qr));
    CHECK(testutil::bitwise_equal(k, kr));
    CHECK(testutil::bitwise_equal(v, vr));

    std::vector<float> repacked(b * n * 3 * h * d);
    kern::merge_qkv_heads(q.data(), k.data(), v.data(), repacked.data(), b, n, h, d);
    CHECK(testutil::bitwise_equal(repacked, packed));
}

TEST_CASE("mean over tokens and elementwise kernels match the reference") {
    Rng rng(48);
    const std::size_t b = 4, n = 7, c = 5;
    const auto x = random_vec(b * n * c, rng);
    std::vector<float> y1(b * c), y2(b * c);
    kern::mean_tokens_forward(x.data(), y1.data(), b, n, c);
    ref::mean_tokens_forward(x.data(), y2.data(), b, n, c);
    CHECK(testutil::bitwise_equal(y1, y2));

    const auto dy = random_vec(b * c, rng);
    std::vector<float> dx1(b * n * c), dx2(b * n * c);
    kern::mean_tokens_backward(dy.data(), dx1.data(), b, n, c);
    ref::mean_tokens_backward(dy.data(), dx2.data(), b, n, c);
    CHECK(testutil::bitwise_equal(dx1, dx2));

    auto r1 = x, r2 = x;
    std::vector<float> o1(x.size()), o2(x.size());
    kern::relu_forward(x.data(), o1.data(), x.size());
    ref::relu_forward(x.data(), o2.data(), x.size());
    CHECK(testutil::bitwise_equal(o1, o2));

    kern::relu_backward(x.data(), dx1.data(), o1.data(), x.size());
    ref::relu_backward(x.data(), dx1.data(), o2.data(), x.size());
    CHECK(testutil::bitwise_equal(o1, o2));
}
