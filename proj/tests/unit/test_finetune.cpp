#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdd/error.hpp"
#include "rdd/finetune.hpp"
#include "support.hpp"

using namespace rdd;

namespace {

template <class R>
concept HasGradient = requires(const R& r, std::span<const double> x) { r.gradient(x); };
static_assert(!HasGradient<RewardModel>, "rewards are black boxes");

struct Fixture {
    NoiseSchedule sched = NoiseSchedule::make(10, 1e-3, 0.2);
    DenoiserParams pre;
    NormStats stats{{0.0, 0.0}, {1.0, 1.0}};
    Fixture() {
        Rng rng(1);
        Matrix rows(256, 2);
        for (double& v : rows.data) v = rng.normal();
        TrainConfig cfg;
        cfg.epochs = 20;
        cfg.batch_size = 64;
        cfg.adam.learning_rate = 3e-3;
        pre = train_ddpm(rows, sched, test::small_arch(2, {32, 32}, 10, 8), cfg).params;
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("roll-in switch anneals from T to 0") {
    CHECK(rollin_switch(1, 50, 100) == 100);
    CHECK(rollin_switch(50, 50, 100) == 0);
    CHECK(rollin_switch(25, 50, 100) == std::lround(100.0 * 25 / 49));
    CHECK(rollin_switch(1, 1, 100) == 100);
    int prev = 101;
    for (int s = 1; s <= 50; ++s) {
        const int k = rollin_switch(s, 50, 100);
        CHECK(k <= prev);
        prev = k;
    }
}

TEST_CASE("roll-in with identical models is ancestral sampling") {
    const auto& f = fixture();
    const auto res = rollin_collect(f.pre, f.pre, f.sched, 40, 5, 77, 2);
    const auto anc = ancestral_sample(f.pre, f.sched, 40, 77);
    REQUIRE(res.states.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        const auto row = res.final.row(i);
        CHECK(std::vector<double>(row.begin(), row.end()) == anc[i]);
        const auto last = res.states[i].row(10);
        CHECK(std::vector<double>(last.begin(), last.end()) == anc[i]);
    }
}

TEST_CASE("roll-in switches networks at k") {
    const auto& f = fixture();
    auto other = DenoiserParams::init(f.pre.arch, 99);
    // k = T: every step uses the pretrained network.
    CHECK(rollin_collect(other, f.pre, f.sched, 8, 10, 3).final == rollin_collect(f.pre, f.pre, f.sched, 8, 10, 3).final);
    // k = 0: every step uses the current network.
    CHECK(rollin_collect(other, f.pre, f.sched, 8, 0, 3).final == rollin_collect(other, other, f.sched, 8, 0, 3).final);
    CHECK_FALSE(rollin_collect(other, f.pre, f.sched, 8, 5, 3).final == rollin_collect(f.pre, f.pre, f.sched, 8, 5, 3).final);
}

TEST_CASE("normalised weights") {
    const auto w = normalized_weights(std::vector<double>{1.0, 0.0}, 1.0);
    const double e = std::exp(1.0);
    CHECK(w[0] == doctest::Approx(2 * e / (e + 1)).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(2 / (e + 1)).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(1.4621).epsilon(1e-4));
    for (double v : normalized_weights(std::vector<double>(7, -3.2), 0.4)) CHECK(v == 1.0);
    bool sat = false;
    normalized_weights(std::vector<double>{100.0, 200.0}, 1.0, &sat);
    CHECK(sat);
    normalized_weights(std::vector<double>{1.0, 2.0}, 1.0, &sat);
    CHECK_FALSE(sat);
    CHECK_THROWS_AS(normalized_weights(std::vector<double>{1.0}, 0.0), ArgumentError);
}

TEST_CASE("uniform rewards give exactly an unweighted epoch") {
    const auto& f = fixture();
    Rng data(4);
    Matrix x0(100, 2);
    for (double& v : x0.data) v = data.normal();
    auto pa = f.pre, pb = f.pre;
    auto oa = OptimizerState::fresh(pa.values.size()), ob = oa;
    Rng ra(12), rb(12);
    weighted_epoch(x0, std::vector<double>(100, 0.7), 2.0, pa, oa, f.sched, 32, ra);
    train_epoch(pb, ob, f.sched, x0, {}, 32, rb);
    CHECK(pa == pb);
    CHECK(oa == ob);
}

TEST_CASE("saturated weights log a warning") {
    const auto& f = fixture();
    Matrix x0(4, 2);
    auto p = f.pre;
    auto o = OptimizerState::fresh(p.values.size());
    Rng rng(1);
    test::LogCapture logs;
    weighted_epoch(x0, std::vector<double>{50, 60, 70, 80}, 1.0, p, o, f.sched, 4, rng);
    CHECK(logs.warnings().size() == 1);
}

TEST_CASE("finetune touches the reward only through evaluate") {
    const auto& f = fixture();
    SyntheticReward base({2.0, 2.0});
    test::CountingReward reward(base);
    FinetuneConfig cfg;
    cfg.iterations = 3;
    cfg.samples = 32;
    cfg.batch_size = 16;
    const auto res = finetune(f.pre, reward, f.stats, cfg, f.sched);
    CHECK(reward.calls() == 3 * 32);
    CHECK(res.history.size() == 3);
    CHECK(res.history[0].switch_k == 10);
    CHECK(res.history[2].switch_k == 0);
    CHECK(finetune(f.pre, base, f.stats, cfg, f.sched).params == res.params);

    cfg.iterations = 0;
    const auto none = finetune(f.pre, base, f.stats, cfg, f.sched);
    CHECK(none.params == f.pre);
    CHECK(none.history.empty());
    CHECK(none.anchor_divergence == 0.0);
}

TEST_CASE("anchor keeps the model closer to the pretrained network") {
    const auto& f = fixture();
    SyntheticReward reward({3.0, 3.0});
    FinetuneConfig cfg;
    cfg.iterations = 10;
    cfg.samples = 64;
    cfg.batch_size = 32;
    cfg.alpha = 2.0;
    cfg.learning_rate = 3e-3;
    cfg.anchor = false;
    const auto free = finetune(f.pre, reward, f.stats, cfg, f.sched);
    cfg.anchor = true;
    cfg.anchor_kappa = 5.0;
    const auto anchored = finetune(f.pre, reward, f.stats, cfg, f.sched);
    CHECK(anchored.anchor_divergence < free.anchor_divergence);
    CHECK(anchor_divergence(f.pre, f.pre, f.sched) == 0.0);
}

TEST_CASE("finetune config validation and failures") {
    FinetuneConfig cfg;
    cfg.samples = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    const auto& f = fixture();
    PenalizedReward nan_reward("nan", 2, [](std::span<const double>) { return std::nan(""); }, {});
    FinetuneConfig small;
    small.iterations = 1;
    small.samples = 4;
    CHECK_THROWS_AS(finetune(f.pre, nan_reward, f.stats, small, f.sched), NumericalError);
}
