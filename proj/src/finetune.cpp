#include "rdd/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdd/error.hpp"
#include "rdd/log.hpp"
#include "rdd/parallel.hpp"

namespace rdd {

void FinetuneConfig::validate() const {
    if (iterations < 0) throw ConfigError("finetune.S: must be >= 0");
    if (samples < 2) throw ConfigError("finetune.m: must be >= 2");
    if (!(alpha > 0.0)) throw ConfigError("finetune.alpha: must be > 0");
    if (!(learning_rate > 0.0)) throw ConfigError("finetune.learning_rate: must be > 0");
    if (!(anchor_kappa >= 0.0)) throw ConfigError("finetune.anchor_kappa: must be >= 0");
    if (inner_epochs < 1) throw ConfigError("finetune.inner_epochs: must be >= 1");
    if (batch_size < 1) throw ConfigError("finetune.batch_size: must be >= 1");
}

int rollin_switch(int iteration, int iterations, int steps) {
    if (iterations <= 1) return steps;
    const double frac = static_cast<double>(iterations - iteration) / static_cast<double>(iterations - 1);
    return std::clamp(static_cast<int>(std::lround(steps * frac)), 0, steps);
}

ChainResult rollin_collect(const DenoiserParams& current, const DenoiserParams& pretrained, const NoiseSchedule& sched,
                           std::size_t m, int switch_k, std::uint64_t seed, unsigned threads) {
    if (!(current.arch == pretrained.arch)) throw ArgumentError("rollin_collect: architectures differ");
    ChainOptions opts;
    opts.keep_states = true;
    opts.threads = threads;
    const PolicySelector policy = [&](int t) -> const DenoiserParams& { return t > switch_k ? current : pretrained; };
    return run_reverse_chain(policy, sched, current.arch.dim, m, seed, opts);
}

std::vector<double> normalized_weights(std::span<const double> rewards, double alpha, bool* saturated) {
    if (rewards.empty()) throw ArgumentError("normalized_weights: no rewards");
    if (!(alpha > 0.0)) throw ArgumentError("normalized_weights: alpha must be positive");
    std::vector<double> e(rewards.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!std::isfinite(rewards[i])) throw NumericalError("normalized_weights: non-finite reward");
        e[i] = std::clamp(rewards[i] / alpha, -kSoftWeightClamp, kSoftWeightClamp);
    }
    const double top = *std::max_element(e.begin(), e.end());
    if (saturated) {
        *saturated = std::abs(top) == kSoftWeightClamp && std::all_of(e.begin(), e.end(), [&](double v) { return v == top; });
    }
    std::vector<double> w(e.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        w[i] = std::exp(e[i] - top);
        sum += w[i];
    }
    const double mean = sum / static_cast<double>(w.size());
    for (double& v : w) v /= mean;
    return w;
}

EpochStats weighted_epoch(const Matrix& x0, std::span<const double> rewards, double alpha, DenoiserParams& params,
                          OptimizerState& opt, const NoiseSchedule& sched, std::size_t batch_size, Rng& rng,
                          const AnchorTerm& anchor, int epochs) {
    if (rewards.size() != x0.rows) throw ArgumentError("weighted_epoch: one reward per trajectory required");
    EpochStats stats;
    bool saturated = false;
    stats.weights = normalized_weights(rewards, alpha, &saturated);
    if (saturated && rewards.size() > 1) {
        log::warn("weighted_epoch: every weight is clamp-saturated; temperature alpha is degenerate for these rewards");
    }
    double sum = 0.0;
    for (double r : rewards) sum += r;
    stats.mean_reward = sum / static_cast<double>(rewards.size());
    double loss = 0.0;
    for (int e = 0; e < epochs; ++e) loss += train_epoch(params, opt, sched, x0, stats.weights, batch_size, rng, anchor);
    stats.mean_loss = loss / static_cast<double>(std::max(1, epochs));
    return stats;
}

std::vector<double> evaluate_rewards(const RewardModel& reward, const Matrix& x, const NormStats& stats,
                                     unsigned threads) {
    std::vector<double> out(x.rows);
    parallel_chunks(x.rows, 16, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = reward.evaluate(denormalize(x.row(i), stats));
    });
    return out;
}

double anchor_divergence(const DenoiserParams& a, const DenoiserParams& b, const NoiseSchedule& sched, std::size_t n,
                         std::uint64_t seed) {
    if (!(a.arch == b.arch)) throw ArgumentError("anchor_divergence: architectures differ");
    const std::size_t d = a.arch.dim;
    Rng rng(seed);
    Matrix x(n, d);
    rng.fill_normal(x.data);
    std::vector<int> ts(n);
    for (auto& t : ts) t = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(sched.steps())));
    const Matrix ea = predict_noise_batch(a, x, ts);
    const Matrix eb = predict_noise_batch(b, x, ts);
    double worst = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (ea(i, j) - eb(i, j)) * (ea(i, j) - eb(i, j));
        worst = std::max(worst, std::sqrt(s / static_cast<double>(n)));
    }
    return worst;
}

FinetuneResult finetune(const DenoiserParams& pretrained, const RewardModel& reward, const NormStats& stats,
                        const FinetuneConfig& cfg, const NoiseSchedule& sched,
                        const std::function<void(const FinetuneRecord&)>& on_iteration) {
    cfg.validate();
    if (pretrained.arch.steps != sched.steps()) throw ConfigError("finetune: model and schedule disagree on T");
    FinetuneResult res{pretrained, {}, 0.0};
    AdamConfig adam;
    adam.learning_rate = cfg.learning_rate;
    OptimizerState opt = OptimizerState::fresh(pretrained.values.size(), adam);
    const AnchorTerm anchor = cfg.anchor && cfg.anchor_kappa > 0.0 ? AnchorTerm{&pretrained, cfg.anchor_kappa} : AnchorTerm{};

    for (int s = 1; s <= cfg.iterations; ++s) {
        const int k = rollin_switch(s, cfg.iterations, sched.steps());
        const auto batch = rollin_collect(res.params, pretrained, sched, cfg.samples, k,
                                          derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(s)), cfg.threads);
        const auto rewards = evaluate_rewards(reward, batch.final, stats, cfg.threads);
        Rng rng(derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(s) + 1));
        DenoiserParams last_good = res.params;
        EpochStats es;
        try {
            es = weighted_epoch(batch.final, rewards, cfg.alpha, res.params, opt, sched, cfg.batch_size, rng, anchor,
                                cfg.inner_epochs);
        } catch (const TrainingDivergence& err) {
            throw TrainingAborted("finetune: iteration " + std::to_string(s) + ": " + err.what(), std::move(last_good));
        }
        const FinetuneRecord rec{s, k, es.mean_reward, es.mean_loss};
        res.history.push_back(rec);
        log::debug("finetune: iteration " + std::to_string(s) + " k=" + std::to_string(k) +
                   " mean reward " + std::to_string(es.mean_reward));
        if (on_iteration) on_iteration(rec);
    }
    res.anchor_divergence = anchor_divergence(res.params, pretrained, sched);
    if (cfg.anchor && res.anchor_divergence > cfg.anchor_bound) {
        log::warn("finetune: noise-prediction divergence from the pretrained model " +
                  std::to_string(res.anchor_divergence) + " exceeds bound " + std::to_string(cfg.anchor_bound));
    }
    return res;
}

}  // namespace rdd
