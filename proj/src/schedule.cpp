#include "rdd/schedule.hpp"

#include <cmath>
#include <string>

#include "rdd/error.hpp"

namespace rdd {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

NoiseSchedule NoiseSchedule::make(int steps, double beta_start, double beta_end, ScheduleKind kind) {
    if (steps < 1) throw ConfigError("schedule: T must be >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw ConfigError("schedule: require 0 < beta_start <= beta_end < 1");
    }
    std::vector<double> betas(static_cast<std::size_t>(steps));
    switch (kind) {
        case ScheduleKind::linear:
            for (int i = 0; i < steps; ++i) {
                const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
                betas[static_cast<std::size_t>(i)] = beta_start + (beta_end - beta_start) * frac;
            }
            break;
    }
    return from_betas(betas);
}

NoiseSchedule NoiseSchedule::from_betas(std::span<const double> betas) {
    if (betas.empty()) throw ConfigError("schedule: T must be >= 1");
    NoiseSchedule s;
    s.steps_ = static_cast<int>(betas.size());
    const std::size_t n = betas.size() + 1;
    s.betas_.assign(n, 0.0);
    s.alphas_.assign(n, 1.0);
    s.alpha_bars_.assign(n, 1.0);
    s.sigmas_.assign(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        const double b = betas[t - 1];
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("schedule: every beta must lie in (0, 1)");
        s.betas_[t] = b;
        s.alphas_[t] = 1.0 - b;
        s.alpha_bars_[t] = s.alpha_bars_[t - 1] * s.alphas_[t];
        s.sigmas_[t] = t == 1 ? 0.0 : std::sqrt(b);
    }
    return s;
}

std::size_t NoiseSchedule::checked(int t, int lo) const {
    if (t < lo || t > steps_) {
        throw IndexError("timestep " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                         std::to_string(steps_) + "]");
    }
    return static_cast<std::size_t>(t);
}

DesignVector forward_step(std::span<const double> x_prev, int t, std::span<const double> noise,
                          const NoiseSchedule& sched) {
    require_same_size(x_prev.size(), noise.size(), "forward_step");
    const double a = std::sqrt(sched.alpha(t));
    const double s = std::sqrt(sched.beta(t));
    DesignVector out(x_prev.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x_prev[i] + s * noise[i];
    return out;
}

DesignVector forward_marginal(std::span<const double> x0, int t, std::span<const double> eps,
                              const NoiseSchedule& sched) {
    require_same_size(x0.size(), eps.size(), "forward_marginal");
    const double ab = sched.alpha_bar(t);
    const double a = std::sqrt(ab);
    const double s = std::sqrt(1.0 - ab);
    DesignVector out(x0.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + s * eps[i];
    return out;
}

void reverse_step_into(std::span<const double> xt, int t, std::span<const double> eps_pred,
                       const NoiseSchedule& sched, std::span<const double> z, std::span<double> out) {
    require_same_size(xt.size(), eps_pred.size(), "reverse_step");
    require_same_size(xt.size(), out.size(), "reverse_step");
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
    const double coef = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
    const double sigma = sched.sigma(t);
    if (sigma != 0.0) require_same_size(xt.size(), z.size(), "reverse_step");
    for (std::size_t i = 0; i < xt.size(); ++i) {
        double v = inv_sqrt_alpha * (xt[i] - coef * eps_pred[i]);
        if (sigma != 0.0) v += sigma * z[i];
        out[i] = v;
    }
}

DesignVector reverse_step(std::span<const double> xt, int t, std::span<const double> eps_pred,
                          const NoiseSchedule& sched, std::span<const double> z) {
    DesignVector out(xt.size());
    reverse_step_into(xt, t, eps_pred, sched, z, out);
    return out;
}

void posterior_mean_x0_into(std::span<const double> xt, int t, std::span<const double> eps_pred,
                            const NoiseSchedule& sched, std::span<double> out) {
    require_same_size(xt.size(), eps_pred.size(), "posterior_mean_x0");
    require_same_size(xt.size(), out.size(), "posterior_mean_x0");
    const double ab = sched.alpha_bar(t);
    if (ab < 1e-12) {
        throw NumericalError("posterior_mean_x0: alpha_bar(" + std::to_string(t) +
                             ") below 1e-12; schedule too aggressive for this estimator");
    }
    const double s = std::sqrt(1.0 - ab);
    const double inv = 1.0 / std::sqrt(ab);
    for (std::size_t i = 0; i < xt.size(); ++i) out[i] = (xt[i] - s * eps_pred[i]) * inv;
}

DesignVector posterior_mean_x0(std::span<const double> xt, int t, std::span<const double> eps_pred,
                               const NoiseSchedule& sched) {
    DesignVector out(xt.size());
    posterior_mean_x0_into(xt, t, eps_pred, sched, out);
    return out;
}

}  // namespace rdd
