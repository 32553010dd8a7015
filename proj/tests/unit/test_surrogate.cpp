#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "rdd/error.hpp"
#include "rdd/random.hpp"
#include "rdd/surrogate.hpp"
#include "support.hpp"

using namespace rdd;

namespace {

double walk(const RegressionTree& t, std::span<const double> x) {
    std::size_t i = 0;
    while (t.nodes[i].feature >= 0) {
        const auto& n = t.nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return t.nodes[i].value;
}

struct Data {
    Matrix x;
    std::vector<double> y;
};

Data smooth_data(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Data d{Matrix(n, 3), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) d.x(i, j) = rng.uniform();
        d.y[i] = std::sin(3 * d.x(i, 0)) + d.x(i, 1) * d.x(i, 1) + 0.5 * d.x(i, 2);
    }
    return d;
}

}  // namespace

TEST_CASE("split candidates") {
    CHECK(split_candidates({3, 1, 2, 2, 1}, 32) == std::vector<double>{1.5, 2.5});
    CHECK(split_candidates({5, 5, 5}, 32).empty());
    std::vector<double> col(1000);
    Rng rng(1);
    for (double& v : col) v = rng.normal();
    auto sorted = col;
    std::sort(sorted.begin(), sorted.end());
    const auto thr = split_candidates(col, 32);
    REQUIRE(thr.size() == 32);
    for (std::size_t k = 1; k <= 32; ++k) {
        const double pos = 999.0 * static_cast<double>(k) / 33.0;
        const auto lo = static_cast<std::size_t>(pos);
        const double q = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
        CHECK(thr[k - 1] == doctest::Approx(q).epsilon(1e-14));
    }
}

TEST_CASE("constant target gives a base-only model") {
    Matrix x(20, 2);
    for (std::size_t i = 0; i < 20; ++i) x(i, 0) = static_cast<double>(i);
    const std::vector<double> y(20, 4.5);
    const auto res = fit_boosted_trees(x, y);
    CHECK(res.model.trees.empty());
    CHECK(predict(res.model, std::vector<double>{100.0, -3.0}) == 4.5);
    CHECK_THROWS_AS(fit_boosted_trees(Matrix(5, 2), std::vector<double>(5)), ArgumentError);
}

TEST_CASE("one stump fits a step exactly") {
    Matrix x(40, 1);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x(i, 0) = static_cast<double>(i % 20) / 19.0;
        y[i] = x(i, 0) > 0.5 ? 3.0 : 1.0;
    }
    BoostConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 1;
    cfg.shrinkage = 1.0;
    const auto res = fit_boosted_trees(x, y, cfg);
    REQUIRE(res.model.trees.size() == 1);
    CHECK(res.train_mse.back() < 1e-24);
    for (std::size_t i = 0; i < 40; ++i) CHECK(predict(res.model, x.row(i)) == doctest::Approx(y[i]).epsilon(1e-14));
    const auto& root = res.model.trees[0].nodes[0];
    CHECK(root.feature == 0);
    CHECK(root.threshold == doctest::Approx((9.0 / 19 + 10.0 / 19) / 2));
}

TEST_CASE("ties prefer the lowest feature") {
    Matrix x(30, 3);
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        const double v = static_cast<double>(i % 10);
        x(i, 0) = 0.0;  // useless
        x(i, 1) = v;
        x(i, 2) = v;  // identical to feature 1
        y[i] = v < 5 ? 0.0 : 1.0;
    }
    BoostConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 1;
    const auto res = fit_boosted_trees(x, y, cfg);
    CHECK(res.model.trees[0].nodes[0].feature == 1);
}

TEST_CASE("ensemble prediction equals an explicit traversal") {
    const auto d = smooth_data(600, 2);
    BoostConfig cfg;
    cfg.n_trees = 50;
    const auto res = fit_boosted_trees(d.x, d.y, cfg);
    CHECK(res.train_mse.size() == 51);
    for (std::size_t k = 1; k < res.train_mse.size(); ++k) CHECK(res.train_mse[k] <= res.train_mse[k - 1]);
    for (const auto& t : res.model.trees) CHECK(t.nodes.size() <= 31);
    const auto test = smooth_data(100, 3);
    const auto batch = predict(res.model, test.x);
    for (std::size_t i = 0; i < 100; ++i) {
        double p = res.model.base_prediction;
        for (const auto& t : res.model.trees) p += res.model.shrinkage * walk(t, test.x.row(i));
        CHECK(batch[i] == doctest::Approx(p).epsilon(1e-13));
    }
    CHECK(r2_score(batch, test.y) > 0.9);
    CHECK_THROWS_AS(predict(res.model, std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("r2 score") {
    const std::vector<double> y{1, 2, 3, 4, 5};
    CHECK(r2_score(y, y) == 1.0);
    CHECK(r2_score(std::vector<double>(5, 3.0), y) == 0.0);
    const double c = 0.3;
    std::vector<double> p(5);
    for (std::size_t i = 0; i < 5; ++i) p[i] = 3.0 + (1 - c) * (y[i] - 3.0);
    CHECK(r2_score(p, y) == doctest::Approx(1 - c * c).epsilon(1e-14));
    // Unit-variance targets shifted by a constant c.
    const std::vector<double> unit{-1.0, 1.0, -1.0, 1.0};
    std::vector<double> shifted(4);
    for (std::size_t i = 0; i < 4; ++i) shifted[i] = unit[i] + c;
    CHECK(r2_score(shifted, unit) == doctest::Approx(1 - c * c).epsilon(1e-14));
    CHECK_THROWS_AS(r2_score(y, std::vector<double>(5, 1.0)), DomainError);
    CHECK_THROWS_AS(r2_score(std::vector<double>{1}, std::vector<double>{1}), ArgumentError);
}

TEST_CASE("tree file round trip and corruption") {
    const auto d = smooth_data(200, 4);
    BoostConfig cfg;
    cfg.n_trees = 10;
    const auto model = fit_boosted_trees(d.x, d.y, cfg).model;
    test::TempDir dir;
    save_trees(dir.file("m.rddt"), model);
    CHECK(load_trees(dir.file("m.rddt")) == model);

    std::stringstream ss;
    write_trees(ss, model);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "RDDT");
    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_trees(truncated), ParseError);
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream bad_magic(bad);
    CHECK_THROWS_AS(read_trees(bad_magic), ParseError);
    CHECK_THROWS_AS(load_trees(dir.file("missing.rddt")), IoError);
}
