#include <doctest.h>

#include <vector>

#include "movt/optim.hpp"
#include "movt/rng.hpp"
#include "support/test_util.hpp"

using movt::ConfigError;
using movt::Rng;
using namespace movt::nn;

TEST_CASE("adamw first step matches the closed-form value") {
    // w = 1, g = 1, defaults: mhat = vhat = 1 after bias correction, so
    // w' = 1 - lr * (1 / (1 + eps) + wd * 1) = 0.999899000001.
    Parameter<double> p("w", {1});
    p.value.data[0] = 1.0;
    p.grad.data[0] = 1.0;
    adamw_step<double>({&p}, AdamwConfig{});
    CHECK(p.value.data[0] == doctest::Approx(0.999899000001).epsilon(1e-9));
    CHECK(p.step == 1);
    CHECK(p.grad.data[0] == 0.0);  // gradients cleared after each step
    CHECK(p.m.data[0] == doctest::Approx(0.1));
    CHECK(p.v.data[0] == doctest::Approx(0.001));
}

TEST_CASE("adamw second step keeps following the closed form") {
    Parameter<double> p("w", {1});
    p.value.data[0] = 1.0;
    for (int step = 0; step < 2; ++step) {
        p.grad.data[0] = 1.0;
        adamw_step<double>({&p}, AdamwConfig{});
    }
    CHECK(p.value.data[0] == doctest::Approx(0.999798000103).epsilon(1e-9));
    CHECK(p.m.data[0] == doctest::Approx(0.19));
    CHECK(p.v.data[0] == doctest::Approx(0.001999));
}

TEST_CASE("weight decay is decoupled from the gradient path") {
    // zero gradient: the adaptive term stays zero, only decay moves the weight
    Parameter<double> p("w", {1});
    p.value.data[0] = 2.0;
    AdamwConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.5;
    adamw_step<double>({&p}, cfg);
    CHECK(p.value.data[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
}

TEST_CASE("gradient clipping rescales to the max norm") {
    Parameter<double> p("w", {2});
    p.grad.data = {3.0, 4.0};  // norm 5
    const double scale = clip_grad_norm<double>({&p}, 1.0);
    CHECK(scale == doctest::Approx(0.2));
    CHECK(p.grad.data[0] == doctest::Approx(0.6));
    CHECK(p.grad.data[1] == doctest::Approx(0.8));
}

TEST_CASE("gradient clipping is a no-op under the threshold") {
    Parameter<double> p("w", {2});
    p.grad.data = {0.3, 0.4};
    const double scale = clip_grad_norm<double>({&p}, 1.0);
    CHECK(scale == 1.0);
    CHECK(p.grad.data[0] == 0.3);
    CHECK_THROWS_AS(clip_grad_norm<double>({&p}, 0.0), ConfigError);
}

TEST_CASE("clipping reduces the global norm across parameters") {
    Parameter<double> a("a", {2}), b("b", {3});
    Rng rng(9);
    testutil::fill_uniform(a.grad.ptr(), 2, rng, -2.0, 2.0);
    testutil::fill_uniform(b.grad.ptr(), 3, rng, -2.0, 2.0);
    clip_grad_norm<double>({&a, &b}, 0.5);
    double sq = 0;
    for (double g : a.grad.data) sq += g * g;
    for (double g : b.grad.data) sq += g * g;
    CHECK(std::sqrt(sq) == doctest::Approx(0.5));
}

TEST_CASE("plateau scheduler drops after patience exhausts") {
    PlateauScheduler sched(1e-3, {0.1, 3, 1e-4, 0.0});
    CHECK(sched.step(1.0) == doctest::Approx(1e-3));  // seeds the baseline
    CHECK(sched.step(1.0) == doctest::Approx(1e-3));  // bad 1
    CHECK(sched.step(1.0) == doctest::Approx(1e-3));  // bad 2
    CHECK(sched.step(1.0) == doctest::Approx(1e-4));  // bad 3 -> drop
    CHECK(sched.lr() == doctest::Approx(1e-4));
}

TEST_CASE("improvement below min_delta does not reset patience") {
    PlateauScheduler sched(1e-3, {0.1, 2, 1e-4, 0.0});
    sched.step(1.0);
    // exactly at the boundary: 1.0 - 1e-4 is not strictly better than
    // best - min_delta, so it counts as a bad epoch
    sched.step(1.0 - 1e-4);
    CHECK(sched.step(1.0 - 1e-4) == doctest::Approx(1e-4));
}

TEST_CASE("real improvement resets the bad-epoch counter") {
    PlateauScheduler sched(1e-3, {0.1, 2, 1e-4, 0.0});
    sched.step(1.0);
    sched.step(1.0);               // bad 1
    sched.step(0.5);               // improvement, counter resets
    sched.step(0.5);               // bad 1
    CHECK(sched.lr() == doctest::Approx(1e-3));
    sched.step(0.5);               // bad 2 -> drop
    CHECK(sched.lr() == doctest::Approx(1e-4));
}

TEST_CASE("learning rate never drops below the floor") {
    PlateauScheduler sched(1e-3, {0.1, 1, 1e-4, 5e-4});
    sched.step(1.0);
    sched.step(1.0);
    CHECK(sched.lr() == doctest::Approx(5e-4));
    sched.step(1.0);
    CHECK(sched.lr() == doctest::Approx(5e-4));
}

TEST_CASE("scheduler rejects a degenerate configuration") {
    CHECK_THROWS_AS(PlateauScheduler(1e-3, {1.5, 3, 1e-4, 0.0}), ConfigError);
    CHECK_THROWS_AS(PlateauScheduler(1e-3, {0.1, 0, 1e-4, 0.0}), ConfigError);
}

TEST_CASE("adamw moves a quadratic toward its minimum") {
    // f(w) = (w - 3)^2, gradient 2(w - 3); decay off to converge on 3 exactly
    Parameter<double> p("w", {1});
    p.value.data[0] = 0.0;
    AdamwConfig cfg;
    cfg.lr = 0.05;
    cfg.weight_decay = 0.0;
    for (int i = 0; i < 2000; ++i) {
        p.grad.data[0] = 2.0 * (p.value.data[0] - 3.0);
        adamw_step<double>({&p}, cfg);
    }
    CHECK(p.value.data[0] == doctest::Approx(3.0).epsilon(1e-3));
}
