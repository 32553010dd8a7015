#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/pretrain.hpp"
#include "rdd/random.hpp"
#include "rdd/rewards.hpp"
#include "rdd/schedule.hpp"

namespace rdd {

struct SvddConfig {
    std::size_t candidates = 10;  // M
    double alpha = 1.0;           // 0 selects argmax mode
    std::size_t n_traj = 1000;
    std::uint64_t seed = 0;
    double greedy_threshold = 1e-9;
    unsigned threads = 1;
    std::size_t chunk = 64;    // trajectories per batched network pass
    bool keep_states = false;  // record x_T..x_0 and per-step candidate values

    // ConfigError unless M >= 1, alpha >= 0, n_traj >= 1.
    void validate() const;
};

struct Trajectory {
    Matrix states;                  // (T + 1) x d, row k holds x_{T-k}; empty unless kept
    std::vector<int> chosen;        // zeta per reverse step T..1, in [1, M]
    Matrix values;                  // T x M candidate soft values; empty unless kept
    DesignVector x0;                // normalised space
    double reward = 0.0;            // r(denormalise(x0))
};

// Reward at the posterior-mean estimate of x_0 given x_t: one network pass
// and one black-box reward call. At t = 0 the state itself is scored.
double soft_value_estimate(std::span<const double> xt, int t, const DenoiserParams& params, const NoiseSchedule& sched,
                           const RewardModel& reward, const NormStats& stats);

// Index (0-based) drawn with probability proportional to
// exp(clamp(v / alpha, +-20)); argmax (first on ties) when
// alpha < greedy_threshold. Non-finite values get zero weight; if nothing
// has weight the choice is uniform and a warning is logged. Consumes one
// uniform (or one index draw on fallback) from rng unless values.size() == 1
// or greedy mode.
std::size_t select_candidate(std::span<const double> values, double alpha, double greedy_threshold, Rng& rng);

struct StepResult {
    DesignVector next;            // x_{t-1}
    std::size_t chosen = 0;       // 0-based
    std::vector<double> values;   // soft value of each candidate
    Matrix candidates;            // M x d
};

// One reward-directed reverse step: M proposals from p(x_{t-1} | x_t), each
// drawing d normals from rng in order, scored by soft_value_estimate at
// t - 1, then one categorical draw.
StepResult svdd_step(std::span<const double> xt, int t, const DenoiserParams& params, const NoiseSchedule& sched,
                     const SvddConfig& cfg, const RewardModel& reward, const NormStats& stats, Rng& rng);

// n_traj independent trajectories. Trajectory i uses the stream layout of
// ancestral_sample, so M = 1 reproduces it bit for bit. Output is independent
// of the thread count.
std::vector<Trajectory> svdd_generate(const DenoiserParams& params, const NoiseSchedule& sched, const SvddConfig& cfg,
                                      const RewardModel& reward, const NormStats& stats);

}  // namespace rdd
