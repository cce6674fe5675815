#include <doctest.h>

#include <vector>

#include "movt/checkpoint.hpp"
#include "movt/flops.hpp"
#include "movt/model.hpp"
#include "movt/rng.hpp"
#include "movt/trackio.hpp"
#include "support/test_util.hpp"

using movt::ConfigError;
using movt::DataError;
using movt::Rng;
using namespace movt::model;
namespace nn = movt::nn;
namespace trackio = movt::trackio;

namespace {

MovTConfig tiny_movt() {
    MovTConfig cfg;
    cfg.embed_dim = 8;
    cfg.layers = 2;
    cfg.heads = 4;
    cfg.ff_expansion = 2;
    cfg.classes = 4;
    return cfg;
}

PixTConfig tiny_pixt() {
    PixTConfig cfg;
    cfg.image_h = 16;
    cfg.image_w = 16;
    cfg.patch = 8;
    cfg.embed_dim = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.ff_expansion = 2;
    cfg.classes = 4;
    return cfg;
}

trackio::PointTrackSet normalized_clip(std::size_t frames, std::size_t tracks,
                                       std::uint64_t seed) {
    trackio::PointTrackSet set;
    set.video_id = "clip";
    set.frames = frames;
    set.tracks = tracks;
    set.normalized = true;
    set.positions.resize(frames * tracks * 2);
    set.occlusion.assign(frames * tracks, 0);
    Rng rng(seed);
    for (auto& p : set.positions) p = static_cast<float>(rng.uniform(0.05, 0.95));
    return set;
}

}  // namespace

TEST_CASE("model configs reject inconsistent settings") {
    MovTConfig bad = tiny_movt();
    bad.heads = 5;  // token_dim 16 not divisible
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_movt();
    bad.dropout = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.dropout = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_movt();
    bad.embed_dim = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_movt();
    bad.conv_kernel = 4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = tiny_movt();
    bad.classes = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    PixTConfig badp = tiny_pixt();
    badp.patch = 5;  // does not divide 16
    CHECK_THROWS_AS(badp.validate(), ConfigError);
    badp = tiny_pixt();
    badp.patch = 0;
    CHECK_THROWS_AS(badp.validate(), ConfigError);

    CHECK_NOTHROW(tiny_movt().validate());
    CHECK_NOTHROW(tiny_pixt().validate());
}

TEST_CASE("model configs round-trip through json") {
    MovTConfig cfg = tiny_movt();
    cfg.head = HeadKind::regression;
    cfg.output_dim = 3;
    cfg.dropout = 0.25;
    const MovTConfig back = movt_config_from_json_text(movt_config_to_json(cfg));
    CHECK(back.embed_dim == cfg.embed_dim);
    CHECK(back.layers == cfg.layers);
    CHECK(back.heads == cfg.heads);
    CHECK(back.head == HeadKind::regression);
    CHECK(back.output_dim == 3);
    CHECK(back.dropout == doctest::Approx(0.25));
    // canonical: serializing twice gives identical text
    CHECK(movt_config_to_json(back) == movt_config_to_json(cfg));

    PixTConfig pcfg = tiny_pixt();
    const PixTConfig pback = pixt_config_from_json_text(pixt_config_to_json(pcfg));
    CHECK(pback.patch == pcfg.patch);
    CHECK(pback.image_h == pcfg.image_h);

    CHECK_THROWS_AS(movt_config_from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(movt_config_from_json_text(pixt_config_to_json(pcfg)), ConfigError);
    CHECK_THROWS_AS(pixt_config_from_json_text(movt_config_to_json(cfg)), ConfigError);
}

TEST_CASE("analytic parameter count matches the built model") {
    MovTConfig cfg = tiny_movt();
    MovTModel<float> net(cfg);
    std::size_t actual = 0;
    for (const auto* p : net.parameters()) actual += p->value.numel();
    CHECK(actual == count_params(cfg));

    PixTConfig pcfg = tiny_pixt();
    PixTModel<float> pnet(pcfg);
    actual = 0;
    for (const auto* p : pnet.parameters()) actual += p->value.numel();
    CHECK(actual == count_params(pcfg));
}

TEST_CASE("default track model lands on the documented budget") {
    const MovTConfig cfg;
    CHECK(cfg.embed_dim == 128);
    CHECK(cfg.token_dim() == 256);
    CHECK(count_params(cfg) == 3244808);
    const ComputeReport r = movt_compute(cfg, 60, 32);
    CHECK(r.total_flops == 648672264);
    CHECK(r.gflops() == doctest::Approx(0.648672264));
    CHECK(r.gflops() > 0.1);
    CHECK(r.gflops() < 1.0);
}

TEST_CASE("flop formulas count multiply-adds and bias adds") {
    CHECK(flops_linear(1, 3, 5) == 35);  // 2*3*5 + 5
    CHECK(params_linear(3, 5) == 20);
    CHECK(params_conv1d(3, 4, 6) == 78);
    CHECK(flops_conv1d(1, 1, 3, 4, 6) == 150);  // 2*3*4*6 + 6
    // attention score/value rows carry no parameters
    const ComputeReport r = movt_compute(tiny_movt(), 10, 8);
    bool found = false;
    for (const auto& row : r.rows) {
        if (row.name == "encoder.block0.attn.scores") {
            found = true;
            CHECK(row.params == 0);
            CHECK(row.flops == 2ull * 10 * 10 * 16);
        }
    }
    CHECK(found);
}

TEST_CASE("motion embeddings ignore a global translation of the clip") {
    MovTModel<float> net(tiny_movt());
    net.init(400);

    trackio::PointTrackSet set = normalized_clip(8, 6, 401);
    // snap positions to a dyadic grid so translation is exact in float
    for (auto& p : set.positions) {
        p = static_cast<float>(static_cast<int>(p * 512.0f)) / 1024.0f;
    }
    trackio::PointTrackSet moved = set;
    for (auto& p : moved.positions) p += 0.25f;

    const trackio::VelocityTensor va = trackio::compute_velocity(set);
    const trackio::VelocityTensor vb = trackio::compute_velocity(moved);
    REQUIRE(testutil::bitwise_equal(va.values, vb.values));

    nn::Tensor<float> ta({6, 8, 3}), tb({6, 8, 3});
    ta.data.assign(va.values.begin(), va.values.end());
    tb.data.assign(vb.values.begin(), vb.values.end());
    const nn::Tensor<float> ea = net.motion_encode(ta);
    const nn::Tensor<float> eb = net.motion_encode(tb);
    CHECK(ea.shape == std::vector<std::size_t>{6, 8});
    CHECK(testutil::bitwise_equal(ea.data, eb.data));

    // the position embedding is what distinguishes the translated clip
    nn::Tensor<float> ma({6, 2}), mb({6, 2});
    const auto mean_a = trackio::mean_position(set);
    const auto mean_b = trackio::mean_position(moved);
    ma.data.assign(mean_a.begin(), mean_a.end());
    mb.data.assign(mean_b.begin(), mean_b.end());
    const nn::Tensor<float> pa = net.position_encode(ma);
    const nn::Tensor<float> pb = net.position_encode(mb);
    CHECK_FALSE(testutil::bitwise_equal(pa.data, pb.data));
}

TEST_CASE("forward output shapes follow the config") {
    MovTConfig cfg = tiny_movt();
    MovTModel<float> net(cfg);
    net.init(402);
    const std::size_t b = 3, n = 5, t = 6;
    nn::Tensor<float> vel({b, n, t, 3});
    nn::Tensor<float> means({b, n, 2});
    Rng rng(403);
    testutil::fill_uniform(vel, rng, -0.05, 0.05);
    testutil::fill_uniform(means, rng, 0.0, 1.0);
    const ModelOutput<float> out = net.forward(vel, means, nullptr, nullptr);
    CHECK(out.output.shape == std::vector<std::size_t>{b, cfg.classes});
    CHECK(out.embedding.shape == std::vector<std::size_t>{b, cfg.token_dim()});

    nn::Tensor<float> bad({b, n, 2});
    CHECK_THROWS_AS(net.forward(bad, means, nullptr, nullptr), ConfigError);
    nn::Tensor<float> mismatch({b, n + 1, 2});
    CHECK_THROWS_AS(net.forward(vel, mismatch, nullptr, nullptr), ConfigError);
}

TEST_CASE("evaluation passes are deterministic, training passes are seeded") {
    MovTModel<float> net(tiny_movt());
    net.init(404);
    const std::size_t b = 2, n = 4, t = 5;
    nn::Tensor<float> vel({b, n, t, 3});
    nn::Tensor<float> means({b, n, 2});
    Rng rng(405);
    testutil::fill_uniform(vel, rng, -0.05, 0.05);
    testutil::fill_uniform(means, rng, 0.0, 1.0);

    const auto e1 = net.forward(vel, means, nullptr, nullptr);
    const auto e2 = net.forward(vel, means, nullptr, nullptr);
    CHECK(testutil::bitwise_equal(e1.output.data, e2.output.data));

    Rng d1(7), d2(7), d3(8);
    const auto t1 = net.forward(vel, means, nullptr, &d1);
    const auto t2 = net.forward(vel, means, nullptr, &d2);
    const auto t3 = net.forward(vel, means, nullptr, &d3);
    CHECK(testutil::bitwise_equal(t1.output.data, t2.output.data));
    CHECK_FALSE(testutil::bitwise_equal(t1.output.data, t3.output.data));
    CHECK_FALSE(testutil::bitwise_equal(t1.output.data, e1.output.data));
}

TEST_CASE("checkpoints restore the exact weights") {
    testutil::TempDir dir("ckpt");
    MovTModel<float> net(tiny_movt());
    net.init(406);
    save_checkpoint(net, dir.file("model.ckpt"));

    MovTModel<float> other(tiny_movt());
    other.init(999);
    load_checkpoint(other, dir.file("model.ckpt"));
    auto pa = net.parameters();
    auto pb = other.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(testutil::bitwise_equal(pa[i]->value.data, pb[i]->value.data));
    }
    CHECK(checkpoint_config_json(dir.file("model.ckpt")) == net.config_json());
}

TEST_CASE("checkpoints refuse a model with a different configuration") {
    testutil::TempDir dir("ckpt_gate");
    MovTModel<float> net(tiny_movt());
    net.init(407);
    save_checkpoint(net, dir.file("model.ckpt"));

    MovTConfig other_cfg = tiny_movt();
    other_cfg.layers = 3;
    MovTModel<float> other(other_cfg);
    CHECK_THROWS_AS(load_checkpoint(other, dir.file("model.ckpt")), DataError);

    const std::string bytes = movt::binio::read_file(dir.file("model.ckpt"));
    movt::binio::write_file(dir.file("trunc.ckpt"), bytes.substr(0, bytes.size() - 8));
    MovTModel<float> fresh(tiny_movt());
    CHECK_THROWS_AS(load_checkpoint(fresh, dir.file("trunc.ckpt")), DataError);
    movt::binio::write_file(dir.file("trail.ckpt"), bytes + "x");
    CHECK_THROWS_AS(load_checkpoint(fresh, dir.file("trail.ckpt")), DataError);
}

TEST_CASE("single-clip inference requires normalized tracks") {
    MovTModel<float> net(tiny_movt());
    net.init(408);
    trackio::PointTrackSet set = normalized_clip(8, 6, 409);
    const ModelOutput<float> out = forward_tracks(net, set);
    CHECK(out.output.shape == std::vector<std::size_t>{1, 4});

    set.normalized = false;
    CHECK_THROWS_AS(forward_tracks(net, set), DataError);
}

TEST_CASE("pixel model consumes frames and shares the head contract") {
    PixTConfig cfg = tiny_pixt();
    PixTModel<float> net(cfg);
    net.init(410);
    const std::size_t b = 2, t = 4;
    nn::Tensor<float> frames({b, t, 16, 16, 3});
    Rng rng(411);
    testutil::fill_uniform(frames, rng, 0.0, 1.0);
    const ModelOutput<float> out = net.forward(frames, nullptr, nullptr);
    CHECK(out.output.shape == std::vector<std::size_t>{b, cfg.classes});
    CHECK(out.embedding.shape == std::vector<std::size_t>{b, cfg.token_dim()});

    nn::Tensor<float> wrong({b, t, 8, 8, 3});
    CHECK_THROWS_AS(net.forward(wrong, nullptr, nullptr), ConfigError);

    // the positional table is a learnable parameter
    bool has_table = false;
    for (const auto* p : net.parameters()) {
        if (p->name == "pos_table") {
            has_table = true;
            CHECK(p->value.shape == std::vector<std::size_t>{cfg.patches(), cfg.token_dim()});
        }
    }
    CHECK(has_table);
}

TEST_CASE("init is reproducible by seed across model instances") {
    MovTModel<float> a(tiny_movt());
    MovTModel<float> b(tiny_movt());
    a.init(500);
    b.init(500);
    auto pa = a.parameters();
    auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(testutil::bitwise_equal(pa[i]->value.data, pb[i]->value.data));
    }
    MovTModel<float> c(tiny_movt());
    c.init(501);
    CHECK_FALSE(
        testutil::bitwise_equal(pa[0]->value.data, c.parameters()[0]->value.data));
}
