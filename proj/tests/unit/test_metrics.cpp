#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rdd/error.hpp"
#include "rdd/metrics.hpp"
#include "rdd/random.hpp"

using namespace rdd;

namespace {

// Type-7 quantile by its textbook definition on an unsorted copy.
double q7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("boxplot of a small list") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto b = boxplot_stats(v);
    CHECK(b.median == 3.0);
    CHECK(b.q1 == 2.0);
    CHECK(b.q3 == 4.0);
    CHECK(b.iqr == 2.0);
    CHECK(b.lower_whisker == 1.0);
    CHECK(b.upper_whisker == 5.0);
    CHECK(b.outliers.empty());

    const auto c = boxplot_stats(std::vector<double>(7, 2.5));
    CHECK(c.median == 2.5);
    CHECK(c.iqr == 0.0);
    CHECK(c.outliers.empty());
    CHECK_THROWS_AS(boxplot_stats(std::vector<double>{}), ArgumentError);

    const auto o = boxplot_stats(std::vector<double>{1, 2, 3, 4, 100});
    CHECK(o.outliers == std::vector<double>{100});
    CHECK(o.upper_whisker == 4.0);
}

TEST_CASE("boxplot matches a brute-force oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.index(60);
        std::vector<double> v(n);
        for (double& x : v) x = rng.index(3) == 0 ? std::round(rng.normal() * 3) : rng.normal() * 10;
        const auto b = boxplot_stats(v);
        const double q1 = q7(v, 0.25), q3 = q7(v, 0.75);
        CHECK(b.q1 == q1);
        CHECK(b.q3 == q3);
        CHECK(b.median == q7(v, 0.5));
        const double lo = q1 - 1.5 * (q3 - q1), hi = q3 + 1.5 * (q3 - q1);
        double lw = std::numeric_limits<double>::infinity(), uw = -lw;
        std::vector<double> out;
        for (double x : v) {
            if (x >= lo) lw = std::min(lw, x);
            if (x <= hi) uw = std::max(uw, x);
            if (x < lo || x > hi) out.push_back(x);
        }
        std::sort(out.begin(), out.end());
        CHECK(b.lower_whisker == lw);
        CHECK(b.upper_whisker == uw);
        CHECK(b.outliers == out);
    }
}

TEST_CASE("normal data has about 0.7% boxplot outliers") {
    Rng rng(5);
    std::vector<double> v(200000);
    for (double& x : v) x = rng.normal();
    const auto b = boxplot_stats(v);
    const double frac = static_cast<double>(b.outliers.size()) / static_cast<double>(v.size());
    CHECK(frac == doctest::Approx(0.00698).epsilon(0.08));
}

TEST_CASE("silverman bandwidth") {
    std::vector<double> v{1, 2, 3, 4, 5};
    const double sd = std::sqrt(2.5), iqr = 2.0;
    CHECK(silverman_bandwidth(v) == doctest::Approx(0.9 * std::min(sd, iqr / 1.34) * std::pow(5.0, -0.2)));
    CHECK(silverman_bandwidth(std::vector<double>(4, 3.0)) == doctest::Approx(3e-3));
    CHECK(silverman_bandwidth(std::vector<double>{0, 0, 0, 0, 0, 0, 0, 0, 10}) > 0.0);
}

TEST_CASE("kde integrates to one") {
    Rng rng(3);
    std::vector<double> two(1000);
    for (std::size_t i = 0; i < two.size(); ++i) two[i] = (i % 2 ? 5.0 : -5.0) + 0.5 * rng.normal();
    for (const auto& v : {std::vector<double>{2.0}, two, std::vector<double>(10, 1.0)}) {
        const double h = silverman_bandwidth(v);
        const auto grid = kde_grid(v, h);
        const auto f = kde(v, h, grid);
        CHECK(std::abs(trapezoid(grid, f) - 1.0) < 1e-3);
    }
    const double h = silverman_bandwidth(two);
    const auto f = kde(two, h, std::vector<double>{-5.0, 0.0, 5.0});
    CHECK(f[0] > 10 * f[1]);
    CHECK(f[2] > 10 * f[1]);
    CHECK_THROWS_AS(kde(two, 0.0, std::vector<double>{0.0}), ArgumentError);
    CHECK(trapezoid(std::vector<double>{0, 1, 3}, std::vector<double>{0, 2, 2}) == 5.0);
}

TEST_CASE("beyond distribution against a direct scan") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> s(1 + rng.index(50)), t(1 + rng.index(50));
        for (double& x : s) x = std::round(rng.normal() * 4);
        for (double& x : t) x = std::round(rng.normal() * 4) - 1;
        const auto b = beyond_distribution(s, t);
        const double tmax = *std::max_element(t.begin(), t.end());
        std::size_t above = 0;
        double ss = 0.0, ts = 0.0;
        for (double x : s) {
            above += x > tmax;
            ss += x;
        }
        for (double x : t) ts += x;
        CHECK(b.fraction_above_max == static_cast<double>(above) / static_cast<double>(s.size()));
        CHECK(b.training_max == tmax);
        CHECK(b.sample_mean == doctest::Approx(ss / s.size()));
        CHECK(b.mean_shift == doctest::Approx(ss / s.size() - ts / t.size()));
    }
    const auto e = beyond_distribution(std::vector<double>{2, 3}, std::vector<double>{1, 2});
    CHECK(e.fraction_above_max == 0.5);
    CHECK(e.relative_improvement == doctest::Approx(1.0 / 1.5));
    const auto z = beyond_distribution(std::vector<double>{1}, std::vector<double>{-1, 1});
    CHECK(std::isinf(z.relative_improvement));
    CHECK_THROWS_AS(beyond_distribution(std::vector<double>{}, std::vector<double>{1}), ArgumentError);
}

TEST_CASE("summary") {
    const auto s = summarize(std::vector<double>{4, 1, 3, 2});
    CHECK(s.count == 4);
    CHECK(s.mean == 2.5);
    CHECK(s.median == 2.5);
    CHECK(s.min == 1);
    CHECK(s.max == 4);
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3)));
}
