#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdd/error.hpp"
#include "rdd/random.hpp"
#include "rdd/schedule.hpp"
#include "support.hpp"

using namespace rdd;

TEST_CASE("linear schedule tables") {
    const auto s = NoiseSchedule::make(100, 1e-4, 0.02);
    CHECK(s.steps() == 100);
    CHECK(s.beta(1) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(s.beta(100) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.sigma(1) == 0.0);
    CHECK(s.sigma(2) == doctest::Approx(std::sqrt(s.beta(2))));
    // alpha_bar as an explicit product of 1 - beta_t on the linear grid.
    double prod = 1.0;
    for (int t = 1; t <= 100; ++t) {
        const double beta = 1e-4 + (0.02 - 1e-4) * (t - 1) / 99.0;
        CHECK(s.beta(t) == doctest::Approx(beta).epsilon(1e-13));
        prod *= 1.0 - beta;
        CHECK(s.alpha_bar(t) == doctest::Approx(prod).epsilon(1e-12));
    }
    CHECK_THROWS_AS(s.beta(0), IndexError);
    CHECK_THROWS_AS(s.alpha_bar(101), IndexError);
    CHECK_THROWS_AS(NoiseSchedule::make(0, 1e-4, 0.02), ConfigError);
    CHECK_THROWS_AS(NoiseSchedule::make(10, 0.0, 0.02), ConfigError);
}

TEST_CASE("short schedules") {
    const auto s = NoiseSchedule::make(1, 0.5, 0.5);
    CHECK(s.alpha(1) == 0.5);
    CHECK(s.alpha_bar(1) == 0.5);
    CHECK(s.sigma(1) == 0.0);
    const std::vector<double> betas{0.1, 0.2};
    const auto two = NoiseSchedule::from_betas(betas);
    CHECK(two.alpha_bar(2) == doctest::Approx(0.72).epsilon(1e-15));
    CHECK(two.alpha(2) == 1.0 - 0.2);
}

TEST_CASE("alpha_bar agrees with a log-space sum") {
    const auto s = NoiseSchedule::make(100, 1e-4, 0.02);
    double log_sum = 0.0;
    for (int t = 1; t <= 100; ++t) log_sum += std::log1p(-(1e-4 + (0.02 - 1e-4) * (t - 1) / 99.0));
    CHECK(s.alpha_bar(100) == doctest::Approx(std::exp(log_sum)).epsilon(1e-12));
}

TEST_CASE("forward kernels") {
    const auto s = NoiseSchedule::make(10, 1e-3, 0.2);
    const std::vector<double> x{1.0, -2.0}, e{0.5, 0.25};
    const auto xt = forward_marginal(x, 4, e, s);
    const double ab = s.alpha_bar(4);
    CHECK(xt[0] == doctest::Approx(std::sqrt(ab) * 1.0 + std::sqrt(1 - ab) * 0.5));
    CHECK(xt[1] == doctest::Approx(std::sqrt(ab) * -2.0 + std::sqrt(1 - ab) * 0.25));
    CHECK(forward_marginal(x, 0, e, s) == x);
    const auto step = forward_step(x, 3, e, s);
    CHECK(step[0] == doctest::Approx(std::sqrt(1 - s.beta(3)) * 1.0 + std::sqrt(s.beta(3)) * 0.5));
    CHECK_THROWS_AS(forward_marginal(x, 4, std::vector<double>{1.0}, s), ArgumentError);
}

TEST_CASE("step composition matches the closed-form marginal") {
    const auto s = NoiseSchedule::make(50, 1e-4, 0.02);
    Rng rng(11);
    const int n = 10000;
    const double x0 = 1.5;
    std::vector<double> last(n);
    std::vector<double> noise(1), x(1);
    for (int i = 0; i < n; ++i) {
        x[0] = x0;
        for (int t = 1; t <= 50; ++t) {
            noise[0] = rng.normal();
            x = forward_step(x, t, noise, s);
        }
        last[static_cast<std::size_t>(i)] = x[0];
    }
    const double m = std::sqrt(s.alpha_bar(50)) * x0;
    const double v = 1.0 - s.alpha_bar(50);
    const double se_mean = std::sqrt(v / n);
    const double se_var = v * std::sqrt(2.0 / (n - 1));
    CHECK(std::abs(test::mean(last) - m) < 3 * se_mean);
    CHECK(std::abs(test::variance(last) - v) < 3 * se_var);
}

TEST_CASE("reverse step and posterior mean") {
    const auto s = NoiseSchedule::make(10, 1e-3, 0.2);
    const std::vector<double> xt{0.3, -0.7}, eps{0.1, 0.2}, z{1.0, -1.0};
    const int t = 5;
    const auto out = reverse_step(xt, t, eps, s, z);
    for (std::size_t j = 0; j < 2; ++j) {
        const double expect = (xt[j] - s.beta(t) / std::sqrt(1 - s.alpha_bar(t)) * eps[j]) / std::sqrt(s.alpha(t)) +
                              std::sqrt(s.beta(t)) * z[j];
        CHECK(out[j] == doctest::Approx(expect).epsilon(1e-14));
    }
    // sigma_1 = 0: the final step is deterministic.
    CHECK(reverse_step(xt, 1, eps, s, z) == reverse_step(xt, 1, eps, s, std::vector<double>{5.0, 5.0}));

    // Exact noise recovers x0.
    const std::vector<double> x0{2.0, -1.0};
    const auto noisy = forward_marginal(x0, 7, eps, s);
    const auto rec = posterior_mean_x0(noisy, 7, eps, s);
    CHECK(rec[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rec[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(posterior_mean_x0(x0, 0, eps, s) == x0);

    const std::vector<double> betas(40, 0.6);
    const auto harsh = NoiseSchedule::from_betas(betas);
    CHECK(harsh.alpha_bar(40) < 1e-12);
    CHECK_THROWS_AS(posterior_mean_x0(xt, 40, eps, harsh), NumericalError);
}
