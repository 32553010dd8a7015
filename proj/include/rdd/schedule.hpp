#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rdd/tensor.hpp"

namespace rdd {

enum class ScheduleKind { linear };

// Variance schedule of a T-step diffusion. Tables are indexed by timestep
// t = 1..T; index 0 holds the clean-data convention (alpha_bar = 1).
class NoiseSchedule {
public:
    static NoiseSchedule make(int steps, double beta_start, double beta_end,
                              ScheduleKind kind = ScheduleKind::linear);

    // Explicit per-step betas (betas[0] is the beta of t = 1).
    static NoiseSchedule from_betas(std::span<const double> betas);

    int steps() const noexcept { return steps_; }
    double beta(int t) const { return betas_.at(checked(t, 1)); }
    double alpha(int t) const { return alphas_.at(checked(t, 1)); }
    double alpha_bar(int t) const { return alpha_bars_.at(checked(t, 0)); }
    // Standard deviation of the reverse-step noise; zero at t = 1.
    double sigma(int t) const { return sigmas_.at(checked(t, 1)); }

private:
    std::size_t checked(int t, int lo) const;

    int steps_ = 0;
    std::vector<double> betas_;
    std::vector<double> alphas_;
    std::vector<double> alpha_bars_;
    std::vector<double> sigmas_;
};

// q(x_t | x_{t-1}): one forward noising step sqrt(alpha_t) x + sqrt(beta_t) noise.
DesignVector forward_step(std::span<const double> x_prev, int t, std::span<const double> noise,
                          const NoiseSchedule& sched);

// Closed-form sample of q(x_t | x_0). t = 0 returns x0.
DesignVector forward_marginal(std::span<const double> x0, int t, std::span<const double> eps,
                              const NoiseSchedule& sched);

// One ancestral step of the learned reverse chain given the predicted noise.
DesignVector reverse_step(std::span<const double> xt, int t, std::span<const double> eps_pred,
                          const NoiseSchedule& sched, std::span<const double> z);
void reverse_step_into(std::span<const double> xt, int t, std::span<const double> eps_pred,
                       const NoiseSchedule& sched, std::span<const double> z, std::span<double> out);

// Posterior-mean estimate of x_0 given x_t and the predicted noise.
// Throws NumericalError when alpha_bar(t) < 1e-12.
DesignVector posterior_mean_x0(std::span<const double> xt, int t, std::span<const double> eps_pred,
                               const NoiseSchedule& sched);
void posterior_mean_x0_into(std::span<const double> xt, int t, std::span<const double> eps_pred,
                            const NoiseSchedule& sched, std::span<double> out);

}  // namespace rdd
