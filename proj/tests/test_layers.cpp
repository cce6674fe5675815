#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "movt/layers.hpp"
#include "movt/losses.hpp"
#include "movt/rng.hpp"
#include "support/test_util.hpp"

using movt::ConfigError;
using movt::DataError;
using movt::NumericFault;
using movt::Rng;
using namespace movt::nn;

TEST_CASE("layer specs reject bad dimensions") {
    CHECK_THROWS_AS(LayerSpec::make_linear(0, 4).validate(), ConfigError);
    CHECK_THROWS_AS(LayerSpec::make_linear(4, 0).validate(), ConfigError);
    CHECK_THROWS_AS(LayerSpec::make_conv1d(4, 4, 2).validate(), ConfigError);  // even kernel
    CHECK_THROWS_AS(LayerSpec::make_conv1d(4, 4, 0).validate(), ConfigError);
    CHECK_THROWS_AS(LayerSpec::make_layer_norm(0).validate(), ConfigError);
    CHECK_THROWS_AS(LayerSpec::make_mhsa(6, 4).validate(), ConfigError);  // 6 % 4 != 0
    CHECK_THROWS_AS(LayerSpec::make_mhsa(8, 0).validate(), ConfigError);
    CHECK_NOTHROW(LayerSpec::make_mhsa(8, 4).validate());
    CHECK_NOTHROW(LayerSpec::make_conv1d(4, 4, 3).validate());
}

TEST_CASE("linear layer computes y = xW + b") {
    Layer<float> lin(LayerSpec::make_linear(2, 2), "fc");
    lin.params()[0].value.data = {5, 6, 7, 8};  // W row-major [in, out]
    lin.params()[1].value.data = {10, 20};
    Tensor<float> x({2, 2});
    x.data = {1, 2, 3, 4};
    const Tensor<float> y = lin.forward(x, nullptr);
    CHECK(y.shape == std::vector<std::size_t>{2, 2});
    CHECK(y.data == std::vector<float>{29, 42, 53, 70});
}

TEST_CASE("linear layer keeps leading batch dimensions") {
    Layer<float> lin(LayerSpec::make_linear(3, 5), "fc");
    Rng rng(1);
    lin.init(rng);
    Tensor<float> x({2, 4, 3});
    testutil::fill_uniform(x, rng);
    const Tensor<float> y = lin.forward(x, nullptr);
    CHECK(y.shape == std::vector<std::size_t>{2, 4, 5});
}

TEST_CASE("linear layer rejects mismatched input width") {
    Layer<float> lin(LayerSpec::make_linear(3, 5), "fc");
    Tensor<float> x({2, 4});
    CHECK_THROWS_AS(lin.forward(x, nullptr), ConfigError);
}

TEST_CASE("non-finite layer output raises a numeric fault") {
    Layer<float> lin(LayerSpec::make_linear(2, 2), "fc");
    Rng rng(2);
    lin.init(rng);
    Tensor<float> x({1, 2});
    x.data = {std::numeric_limits<float>::quiet_NaN(), 0.0f};
    CHECK_THROWS_AS(lin.forward(x, nullptr), NumericFault);
}

TEST_CASE("temporal max pool keeps the first maximum") {
    Layer<float> pool(LayerSpec::make_maxpool_time(), "pool");
    Tensor<float> x({1, 3, 2});
    // channel 0: 1, 5, 5 -> max 5 at t=1 (first win); channel 1: 3, 2, 7
    x.data = {1, 3, 5, 2, 5, 7};
    LayerCache<float> cache;
    const Tensor<float> y = pool.forward(x, &cache);
    CHECK(y.shape == std::vector<std::size_t>{1, 2});
    CHECK(y.data == std::vector<float>{5, 7});
    CHECK(cache.argmax == std::vector<std::uint32_t>{1, 2});

    Tensor<float> dy({1, 2});
    dy.data = {10, 20};
    const Tensor<float> dx = pool.backward(cache, dy);
    CHECK(dx.data == std::vector<float>{0, 0, 10, 0, 0, 20});
}

TEST_CASE("layer norm standardizes each row") {
    const std::size_t c = 8;
    Layer<float> ln(LayerSpec::make_layer_norm(c), "ln");
    Rng dummy(3);
    ln.init(dummy);  // gamma = 1, beta = 0
    Tensor<float> x({4, c});
    Rng rng(4);
    testutil::fill_uniform(x, rng);
    const Tensor<float> y = ln.forward(x, nullptr);
    for (std::size_t r = 0; r < 4; ++r) {
        double mean = 0, var = 0;
        for (std::size_t j = 0; j < c; ++j) mean += y.data[r * c + j];
        mean /= c;
        for (std::size_t j = 0; j < c; ++j) {
            const double d = y.data[r * c + j] - mean;
            var += d * d;
        }
        var /= c;
        CHECK(std::abs(mean) < 1e-5);
        CHECK(std::abs(var - 1.0) < 1e-3);
    }
}

TEST_CASE("mean pool averages tokens") {
    Layer<float> pool(LayerSpec::make_mean_pool(), "pool");
    Tensor<float> x({1, 2, 2});
    x.data = {1, 2, 3, 4};
    const Tensor<float> y = pool.forward(x, nullptr);
    CHECK(y.data == std::vector<float>{2, 3});
}

TEST_CASE("relu clamps negatives and gates gradients") {
    Layer<float> act(LayerSpec::make_relu(), "act");
    Tensor<float> x({1, 4});
    x.data = {-1, 0, 2, -3};
    LayerCache<float> cache;
    const Tensor<float> y = act.forward(x, &cache);
    CHECK(y.data == std::vector<float>{0, 0, 2, 0});
    Tensor<float> dy({1, 4});
    dy.data = {1, 1, 1, 1};
    const Tensor<float> dx = act.backward(cache, dy);
    CHECK(dx.data == std::vector<float>{0, 0, 1, 0});
}

TEST_CASE("mhsa with zeroed qkv weights reduces to the projected bias") {
    // q = k = v = 0 for every token, so attention mixes zero vectors and the
    // output is the projection bias at every position.
    const std::size_t dim = 8, heads = 2, b = 2, n = 3;
    Layer<float> attn(LayerSpec::make_mhsa(dim, heads), "attn");
    attn.params()[2].value.fill(0.5f);  // wproj (irrelevant: ctx = 0)
    for (std::size_t j = 0; j < dim; ++j)
        attn.params()[3].value.data[j] = static_cast<float>(j);  // bproj
    Tensor<float> x({b, n, dim});
    Rng rng(5);
    testutil::fill_uniform(x, rng);
    LayerCache<float> cache;
    const Tensor<float> y = attn.forward(x, &cache);
    CHECK(y.shape == std::vector<std::size_t>{b, n, dim});
    for (std::size_t r = 0; r < b * n; ++r) {
        for (std::size_t j = 0; j < dim; ++j) {
            CHECK(y.data[r * dim + j] == doctest::Approx(static_cast<double>(j)));
        }
    }
    // zero scores -> uniform attention over tokens
    for (std::size_t i = 0; i < cache.attn.numel(); ++i) {
        CHECK(cache.attn.data[i] == doctest::Approx(1.0 / n));
    }
}

TEST_CASE("mhsa attention rows are a distribution") {
    const std::size_t dim = 8, heads = 4, b = 1, n = 5;
    Layer<float> attn(LayerSpec::make_mhsa(dim, heads), "attn");
    Rng rng(6);
    attn.init(rng);
    Tensor<float> x({b, n, dim});
    testutil::fill_uniform(x, rng);
    LayerCache<float> cache;
    attn.forward(x, &cache);
    REQUIRE(cache.attn.shape == std::vector<std::size_t>{b * heads, n, n});
    for (std::size_t row = 0; row < b * heads * n; ++row) {
        double sum = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const float a = cache.attn.data[row * n + j];
            CHECK(a >= 0.0f);
            sum += a;
        }
        CHECK(sum == doctest::Approx(1.0));
    }
}

TEST_CASE("parameter initialization is reproducible by seed") {
    Layer<float> a(LayerSpec::make_linear(16, 16), "fc");
    Layer<float> b(LayerSpec::make_linear(16, 16), "fc");
    Rng ra(7), rb(7), rc(8);
    a.init(ra);
    b.init(rb);
    CHECK(testutil::bitwise_equal(a.params()[0].value.data, b.params()[0].value.data));
    Layer<float> c(LayerSpec::make_linear(16, 16), "fc");
    c.init(rc);
    CHECK_FALSE(testutil::bitwise_equal(a.params()[0].value.data, c.params()[0].value.data));
    // biases start at zero
    for (float v : a.params()[1].value.data) CHECK(v == 0.0f);
}

TEST_CASE("parameter names and shapes follow the layer") {
    Layer<float> attn(LayerSpec::make_mhsa(8, 2), "enc.attn");
    REQUIRE(attn.params().size() == 4);
    CHECK(attn.params()[0].name == "enc.attn.wqkv");
    CHECK(attn.params()[0].value.shape == std::vector<std::size_t>{8, 24});
    CHECK(attn.params()[1].name == "enc.attn.bqkv");
    CHECK(attn.params()[2].name == "enc.attn.wproj");
    CHECK(attn.params()[2].value.shape == std::vector<std::size_t>{8, 8});
    CHECK(attn.params()[3].name == "enc.attn.bproj");

    Layer<float> conv(LayerSpec::make_conv1d(4, 6, 3), "conv");
    CHECK(conv.params()[0].value.shape == std::vector<std::size_t>{3, 4, 6});
    CHECK(conv.params()[1].value.shape == std::vector<std::size_t>{6});
}

TEST_CASE("cross entropy on uniform logits is log of class count") {
    Tensor<float> logits({2, 4});
    logits.fill(0.7f);  // equal logits, any constant
    const float loss = cross_entropy(logits, {0, 3}, static_cast<Tensor<float>*>(nullptr));
    CHECK(loss == doctest::Approx(std::log(4.0)));
}

TEST_CASE("cross entropy gradient is softmax minus one-hot over batch") {
    Tensor<double> logits({1, 3});
    logits.data = {1.0, 2.0, 3.0};
    Tensor<double> dlogits;
    cross_entropy(logits, {1}, &dlogits);
    const auto p = softmax_probs(logits.ptr(), 3);
    CHECK(dlogits.data[0] == doctest::Approx(p[0]));
    CHECK(dlogits.data[1] == doctest::Approx(p[1] - 1.0));
    CHECK(dlogits.data[2] == doctest::Approx(p[2]));
    CHECK_THROWS_AS(
        cross_entropy(logits, {7}, static_cast<Tensor<double>*>(nullptr)), DataError);
}

TEST_CASE("mse averages squared error over all elements") {
    Tensor<double> pred({2, 2}), target({2, 2});
    pred.data = {1, 2, 3, 4};
    target.data = {1, 2, 3, 2};
    Tensor<double> dpred;
    const double loss = mse(pred, target, &dpred);
    CHECK(loss == doctest::Approx(1.0));  // (0+0+0+4)/4
    CHECK(dpred.data[3] == doctest::Approx(2.0 * 2.0 / 4.0));
    CHECK(dpred.data[0] == 0.0);
}
