#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "rdd/error.hpp"
#include "rdd/random.hpp"
#include "rdd/rewards.hpp"

using namespace rdd;

namespace {

using I2 = std::array<std::int64_t, 2>;

int orient(const I2& a, const I2& b, const I2& c) {
    const std::int64_t v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    return (v > 0) - (v < 0);
}

// Proper crossings of non-adjacent edges, integer arithmetic.
std::size_t brute_crossings(const std::vector<I2>& p) {
    const std::size_t n = p.size();
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j <= i) continue;
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) continue;
            const I2 &a = p[i], &b = p[(i + 1) % n], &c = p[j], &d = p[(j + 1) % n];
            const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
            if (o1 * o2 < 0 && o3 * o4 < 0) ++count;
        }
    }
    return count;
}

std::vector<double> square_airfoil() {
    // Convex polygon of 192 points on a circle inside [0, 1]^2.
    std::vector<double> v(kAirfoilDim);
    for (std::size_t i = 0; i < kAirfoilPoints; ++i) {
        const double a = 2.0 * 3.141592653589793 * static_cast<double>(i) / kAirfoilPoints;
        v[2 * i] = 0.5 + 0.4 * std::cos(a);
        v[2 * i + 1] = 0.5 + 0.4 * std::sin(a);
    }
    return v;
}

}  // namespace

TEST_CASE("composite and scalar rewards") {
    CHECK(composite_reward(5.0, 0.0) == 5.0);
    CHECK(composite_reward(5.0, 5.0) == 0.0);
    CHECK(ship_reward(500.0, 1e-3, 0.0) == doctest::Approx(-0.5));
    CHECK(ship_reward(0.0, 1e-3, 2.0) == 2.0);
    CHECK(ship_reward(10.0, 1.0, 0.0) > ship_reward(20.0, 1.0, 0.0));
    const std::vector<double> t{4.0, 4.0};
    CHECK(synthetic_benchmark_reward(t, t) == 0.0);
    CHECK(synthetic_benchmark_reward(std::vector<double>{4.0, 5.0}, t) == -1.0);
    CHECK(synthetic_benchmark_reward(std::vector<double>{1.0, -2.0}, t) == -(9.0 + 36.0));
    CHECK_THROWS_AS(synthetic_benchmark_reward(std::vector<double>{1.0}, t), ArgumentError);
}

TEST_CASE("soft weights") {
    CHECK(soft_weight(0.0, 2.0) == 1.0);
    CHECK(soft_weight(2.0, 2.0) == doctest::Approx(std::exp(1.0)));
    CHECK(soft_weight(50.0, 1.0) == std::exp(20.0));
    CHECK(soft_weight(-50.0, 1.0) == std::exp(-20.0));
    CHECK_THROWS_AS(soft_weight(1.0, 0.0), ArgumentError);
    Rng rng(1);
    double worst = 0.0;
    double prev_r = -100.0, prev_w = soft_weight(-100.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = -100.0 + 200.0 * rng.uniform();
        worst = std::max(worst, std::abs(soft_weight(r, 1e9) - 1.0));
        if (r > prev_r) CHECK(soft_weight(r, 3.0) >= prev_w);
        prev_r = r;
        prev_w = soft_weight(r, 3.0);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("self-intersection canonical cases") {
    const std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(check_self_intersection(square) == 0);
    const std::vector<Point2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK(check_self_intersection(bowtie) == 1);
    const std::vector<Point2> tri{{0, 0}, {1, 0}, {0, 1}};
    CHECK(check_self_intersection(tri) == 0);
    // Touching at a vertex is not a proper crossing.
    const std::vector<Point2> touch{{0, 0}, {2, 0}, {1, 0}, {1, 1}};
    CHECK(check_self_intersection(touch) == 0);
}

TEST_CASE("self-intersection matches an integer brute force") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + rng.index(20);
        std::vector<I2> ip(n);
        std::vector<Point2> dp(n);
        for (std::size_t i = 0; i < n; ++i) {
            ip[i] = {static_cast<std::int64_t>(rng.index(12)), static_cast<std::int64_t>(rng.index(12))};
            dp[i] = {static_cast<double>(ip[i][0]), static_cast<double>(ip[i][1])};
        }
        CHECK(check_self_intersection(dp) == brute_crossings(ip));
    }
}

TEST_CASE("airfoil penalty") {
    auto x = square_airfoil();
    CHECK(airfoil_feasibility_penalty(x) == 0.0);
    x[10] = 1.2;
    // Pushing one point outward keeps the polygon simple.
    CHECK(airfoil_feasibility_penalty(x) == doctest::Approx(2.0));
    CHECK_THROWS_AS(airfoil_feasibility_penalty(std::vector<double>(10)), ArgumentError);

    const std::vector<double> bowtie{0, 0, 1, 1, 1, 0, 0, 1};
    CHECK(polyline_feasibility_penalty(bowtie, {10.0, 3.0}) == 3.0);

    // Soundness: zero exactly when in range and simple.
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(12);
        for (double& c : v) c = -0.2 + 1.4 * rng.uniform();
        bool in_range = true;
        for (double c : v) in_range = in_range && c >= 0.0 && c <= 1.0;
        const bool simple = check_self_intersection(to_points(v)) == 0;
        CHECK((polyline_feasibility_penalty(v) == 0.0) == (in_range && simple));
    }
}

TEST_CASE("reward models are pure") {
    SyntheticReward syn({4.0, 4.0});
    PenalizedReward pen("p", 2, [](std::span<const double> x) { return x[0] + x[1]; },
                        [](std::span<const double> x) { return x[0] > 1 ? 1.0 : 0.0; });
    const std::vector<double> x{0.3, 2.5};
    const double a = syn.evaluate(x), b = pen.evaluate(x);
    for (int i = 0; i < 1000; ++i) {
        CHECK(syn.evaluate(x) == a);
        CHECK(pen.evaluate(x) == b);
    }
    CHECK(pen.evaluate(std::vector<double>{2.0, 1.0}) == 2.0);
    CHECK_THROWS_AS(pen.evaluate(std::vector<double>{1.0}), ArgumentError);
}
