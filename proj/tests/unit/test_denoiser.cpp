#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/error.hpp"
#include "rdd/random.hpp"
#include "support.hpp"

using namespace rdd;

TEST_CASE("parameter layout") {
    const auto a = test::small_arch(3, {5, 7}, 10, 4);
    // (3+4)*5+5 + 5*7+7 + 7*3+3
    CHECK(a.parameter_count() == 40 + 42 + 24);
    const auto p = DenoiserParams::init(a, 1);
    CHECK(p.values.size() == a.parameter_count());
    CHECK(p.weight_offset(1) == 40);
    CHECK(p.bias_offset(0) == 35);
    for (std::size_t i = p.bias_offset(0); i < p.weight_offset(1); ++i) CHECK(p.values[i] == 0.0);
    CHECK(DenoiserParams::init(a, 1) == p);
    CHECK_FALSE(DenoiserParams::init(a, 2) == p);

    auto bad = a;
    bad.dim = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("time embedding") {
    const auto e = time_embedding(5, 8, 100);
    REQUIRE(e.size() == 8);
    // Frequencies T^(-k/half).
    for (std::size_t k = 0; k < 4; ++k) {
        const double f = std::pow(100.0, -static_cast<double>(k) / 4.0);
        CHECK(e[2 * k] == doctest::Approx(std::sin(5 * f)).epsilon(1e-12));
        CHECK(e[2 * k + 1] == doctest::Approx(std::cos(5 * f)).epsilon(1e-12));
    }
}

TEST_CASE("gradient matches central differences") {
    const auto a = test::small_arch(2, {6, 5}, 10, 4);
    auto p = DenoiserParams::init(a, 3);
    Rng rng(9);
    for (double& v : p.values) v += 0.1 * rng.normal();
    const auto sched = NoiseSchedule::make(10, 1e-3, 0.2);
    std::vector<std::vector<double>> x0(4, std::vector<double>(2)), eps(4, std::vector<double>(2));
    std::vector<NoiseExample> batch;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 2; ++j) {
            x0[i][j] = rng.normal();
            eps[i][j] = rng.normal();
        }
        batch.push_back({x0[i], 1 + 3 * i % 10, eps[i]});
    }
    const std::vector<double> w{0.5, 1.5, 1.0, 2.0};
    const auto ref = DenoiserParams::init(a, 4);
    const AnchorTerm anchor{&ref, 0.3};
    const auto lg = loss_and_grad(p, batch, sched, w, anchor);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double h = 1e-6;
        auto q = p;
        q.values[i] += h;
        const double up = loss_and_grad(q, batch, sched, w, anchor).loss;
        q.values[i] -= 2 * h;
        const double dn = loss_and_grad(q, batch, sched, w, anchor).loss;
        const double fd = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(fd - lg.grad[i]) / std::max(1e-3, std::abs(fd) + std::abs(lg.grad[i])));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("loss oracle and batch independence") {
    const auto a = test::small_arch(2, {8}, 10, 4);
    const auto p = DenoiserParams::init(a, 5);
    const auto sched = NoiseSchedule::make(10, 1e-3, 0.2);
    const std::vector<double> x0{0.4, -0.2}, eps{1.0, 0.5};
    NoiseExample ex{x0, 6, eps};
    const auto xt = forward_marginal(x0, 6, eps, sched);
    const auto pred = predict_noise(p, xt, 6);
    const double expect = (eps[0] - pred[0]) * (eps[0] - pred[0]) + (eps[1] - pred[1]) * (eps[1] - pred[1]);
    CHECK(loss_and_grad(p, std::span(&ex, 1), sched).loss == doctest::Approx(expect).epsilon(1e-14));

    Rng rng(2);
    Matrix xs(33, 2);
    std::vector<int> ts(33);
    for (std::size_t i = 0; i < 33; ++i) {
        xs(i, 0) = rng.normal();
        xs(i, 1) = rng.normal();
        ts[i] = 1 + static_cast<int>(rng.index(10));
    }
    const auto batch = predict_noise_batch(p, xs, ts);
    for (std::size_t i = 0; i < 33; ++i) {
        const auto single = predict_noise(p, xs.row(i), ts[i]);
        CHECK(single[0] == batch(i, 0));
        CHECK(single[1] == batch(i, 1));
    }
}

TEST_CASE("adam step") {
    const auto a = test::small_arch(1, {2}, 5, 2);
    auto p = DenoiserParams::init(a, 1);
    const auto before = p;
    auto st = OptimizerState::fresh(p.values.size(), AdamConfig{0.01});
    std::vector<double> g(p.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (i % 2 ? -1.0 : 1.0) * (0.1 + i);
    adam_step(p, st, g);
    CHECK(st.step_count == 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        // First bias-corrected step is lr * g / (|g| + eps).
        const double expect = before.values[i] - 0.01 * g[i] / (std::abs(g[i]) + 1e-8);
        CHECK(p.values[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    const auto snapshot = p;
    const auto st_snapshot = st;
    g[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(p, st, g), TrainingDivergence);
    CHECK(p == snapshot);
    CHECK(st == st_snapshot);
}
