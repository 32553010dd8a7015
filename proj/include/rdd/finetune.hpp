#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rdd/denoiser.hpp"
#include "rdd/pretrain.hpp"
#include "rdd/rewards.hpp"
#include "rdd/schedule.hpp"

namespace rdd {

struct FinetuneConfig {
    int iterations = 50;          // S
    std::size_t samples = 256;    // m trajectories per iteration
    double alpha = 1.0;           // temperature of the reward weights
    double learning_rate = 1e-3;  // gamma
    bool anchor = true;           // pull toward the pretrained network
    double anchor_kappa = 0.01;
    double anchor_bound = 1.0;    // warn when anchor_divergence exceeds this
    int inner_epochs = 1;         // passes over each iteration's batch
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    // ConfigError unless S >= 0, m >= 2, alpha > 0, gamma > 0, kappa >= 0,
    // inner_epochs >= 1, batch_size >= 1.
    void validate() const;
};

// Roll-in switch k for iteration s of S (1-based): reverse steps t > k use the
// current model, t <= k the pretrained one. Anneals linearly from k = T at
// s = 1 to k = 0 at s = S.
int rollin_switch(int iteration, int iterations, int steps);

// m full trajectories from the mixed policy, all intermediate states kept.
ChainResult rollin_collect(const DenoiserParams& current, const DenoiserParams& pretrained, const NoiseSchedule& sched,
                           std::size_t m, int switch_k, std::uint64_t seed, unsigned threads = 1);

// exp(clamp(r / alpha, +-20)) rescaled to mean 1 over the batch. Equal
// rewards give weights of exactly 1. Sets *saturated when every clamped
// exponent sits at the same clamp bound.
std::vector<double> normalized_weights(std::span<const double> rewards, double alpha, bool* saturated = nullptr);

struct EpochStats {
    double mean_reward = 0.0;
    double mean_loss = 0.0;
    std::vector<double> weights;
};

// Reward-weighted noise-matching update on the final designs x0 (normalised
// space) of a batch of trajectories, `epochs` passes. With equal rewards this
// is exactly train_epoch with no weights on the same RNG stream.
EpochStats weighted_epoch(const Matrix& x0, std::span<const double> rewards, double alpha, DenoiserParams& params,
                          OptimizerState& opt, const NoiseSchedule& sched, std::size_t batch_size, Rng& rng,
                          const AnchorTerm& anchor = {}, int epochs = 1);

struct FinetuneRecord {
    int iteration = 0;
    int switch_k = 0;
    double mean_reward = 0.0;  // of the collected batch
    double mean_loss = 0.0;
};

struct FinetuneResult {
    DenoiserParams params;
    std::vector<FinetuneRecord> history;
    double anchor_divergence = 0.0;
};

// S rounds of roll-in collection and reward-weighted updates. Rewards are
// evaluated on denormalised designs through RewardModel::evaluate only.
// A non-finite update throws TrainingAborted carrying the last finite
// parameters.
FinetuneResult finetune(const DenoiserParams& pretrained, const RewardModel& reward, const NormStats& stats,
                        const FinetuneConfig& cfg, const NoiseSchedule& sched,
                        const std::function<void(const FinetuneRecord&)>& on_iteration = {});

// Largest per-coordinate RMS difference between the noise predictions of two
// networks over n held-out inputs (x_t ~ N(0, I), t uniform).
double anchor_divergence(const DenoiserParams& a, const DenoiserParams& b, const NoiseSchedule& sched,
                         std::size_t n = 512, std::uint64_t seed = 0x5eed);

// Rewards of the rows of x (normalised space) after denormalisation.
std::vector<double> evaluate_rewards(const RewardModel& reward, const Matrix& x, const NormStats& stats,
                                     unsigned threads = 1);

}  // namespace rdd
