#include "rdd/svdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdd/error.hpp"
#include "rdd/log.hpp"
#include "rdd/parallel.hpp"

namespace rdd {

namespace {

// Soft values of the rows of `x`, all at timestep t, in one batched pass.
void batch_values(const Matrix& x, int t, const DenoiserParams& params, const NoiseSchedule& sched,
                  const RewardModel& reward, const NormStats& stats, std::span<double> out) {
    if (t == 0) {
        for (std::size_t i = 0; i < x.rows; ++i) out[i] = reward.evaluate(denormalize(x.row(i), stats));
        return;
    }
    const std::vector<int> ts(x.rows, t);
    const Matrix eps = predict_noise_batch(params, x, ts);
    DesignVector x0(x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        posterior_mean_x0_into(x.row(i), t, eps.row(i), sched, x0);
        out[i] = reward.evaluate(denormalize(x0, stats));
    }
}

}  // namespace

void SvddConfig::validate() const {
    if (candidates < 1) throw ConfigError("svdd.M: must be >= 1");
    if (!(alpha >= 0.0)) throw ConfigError("svdd.alpha: must be >= 0");
    if (n_traj < 1) throw ConfigError("svdd.n_traj: must be >= 1");
    if (!(greedy_threshold >= 0.0)) throw ConfigError("svdd.greedy_threshold: must be >= 0");
}

double soft_value_estimate(std::span<const double> xt, int t, const DenoiserParams& params, const NoiseSchedule& sched,
                           const RewardModel& reward, const NormStats& stats) {
    if (t == 0) return reward.evaluate(denormalize(xt, stats));
    const DesignVector eps = predict_noise(params, xt, t);
    return reward.evaluate(denormalize(posterior_mean_x0(xt, t, eps, sched), stats));
}

std::size_t select_candidate(std::span<const double> values, double alpha, double greedy_threshold, Rng& rng) {
    const std::size_t m = values.size();
    if (m == 0) throw ArgumentError("select_candidate: no candidates");
    if (m == 1) return 0;
    if (alpha < greedy_threshold) {
        std::size_t best = m;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::isnan(values[i])) continue;
            if (best == m || values[i] > values[best]) best = i;
        }
        if (best < m) return best;
        log::warn("svdd: no comparable candidate values; choosing uniformly");
        return static_cast<std::size_t>(rng.index(m));
    }
    std::vector<double> e(m, -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(values[i])) continue;
        e[i] = std::clamp(values[i] / alpha, -kSoftWeightClamp, kSoftWeightClamp);
        top = std::max(top, e[i]);
    }
    const double u = rng.uniform();
    if (!std::isfinite(top)) {
        log::warn("svdd: every candidate weight is zero; choosing uniformly");
        return std::min(m - 1, static_cast<std::size_t>(u * static_cast<double>(m)));
    }
    std::vector<double> cum(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += std::isfinite(e[i]) ? std::exp(e[i] - top) : 0.0;
        cum[i] = acc;
    }
    const double target = u * acc;
    for (std::size_t i = 0; i < m; ++i) {
        if (target < cum[i]) return i;
    }
    return m - 1;
}

StepResult svdd_step(std::span<const double> xt, int t, const DenoiserParams& params, const NoiseSchedule& sched,
                     const SvddConfig& cfg, const RewardModel& reward, const NormStats& stats, Rng& rng) {
    if (t < 1 || t > sched.steps()) throw IndexError("svdd_step: t out of range");
    const std::size_t d = xt.size(), m = cfg.candidates;
    StepResult res;
    const DesignVector eps = predict_noise(params, xt, t);
    res.candidates = Matrix(m, d);
    std::vector<double> z(d);
    for (std::size_t c = 0; c < m; ++c) {
        rng.fill_normal(z);
        reverse_step_into(xt, t, eps, sched, z, res.candidates.row(c));
    }
    res.values.resize(m);
    batch_values(res.candidates, t - 1, params, sched, reward, stats, res.values);
    res.chosen = select_candidate(res.values, cfg.alpha, cfg.greedy_threshold, rng);
    const auto row = res.candidates.row(res.chosen);
    res.next.assign(row.begin(), row.end());
    return res;
}

std::vector<Trajectory> svdd_generate(const DenoiserParams& params, const NoiseSchedule& sched, const SvddConfig& cfg,
                                      const RewardModel& reward, const NormStats& stats) {
    cfg.validate();
    const int steps = sched.steps();
    const std::size_t d = params.arch.dim, m = cfg.candidates;
    if (reward.dim() != 0 && reward.dim() != d) throw ConfigError("svdd: reward dimension does not match model");
    std::vector<Trajectory> out(cfg.n_traj);
    const StreamLayout streams{cfg.seed};

    parallel_chunks(cfg.n_traj, cfg.chunk, cfg.threads, [&](std::size_t begin, std::size_t end) {
        const std::size_t rows = end - begin;
        Matrix x(rows, d);
        for (std::size_t r = 0; r < rows; ++r) {
            Trajectory& tr = out[begin + r];
            Rng rng = streams.initial(begin + r);
            rng.fill_normal(x.row(r));
            tr.chosen.reserve(static_cast<std::size_t>(steps));
            if (cfg.keep_states) {
                tr.states = Matrix(static_cast<std::size_t>(steps) + 1, d);
                tr.values = Matrix(static_cast<std::size_t>(steps), m);
                std::copy(x.row(r).begin(), x.row(r).end(), tr.states.row(0).begin());
            }
        }
        std::vector<int> ts(rows);
        std::vector<double> z(d);
        Matrix cand(rows * m, d);
        std::vector<double> values(rows * m);
        std::vector<Rng> rngs;
        rngs.reserve(rows);
        for (int t = steps; t >= 1; --t) {
            std::fill(ts.begin(), ts.end(), t);
            const Matrix eps = predict_noise_batch(params, x, ts);
            rngs.clear();
            for (std::size_t r = 0; r < rows; ++r) {
                rngs.push_back(streams.step(begin + r, t));
                for (std::size_t c = 0; c < m; ++c) {
                    rngs.back().fill_normal(z);
                    reverse_step_into(x.row(r), t, eps.row(r), sched, z, cand.row(r * m + c));
                }
            }
            batch_values(cand, t - 1, params, sched, reward, stats, values);
            for (std::size_t r = 0; r < rows; ++r) {
                Trajectory& tr = out[begin + r];
                const std::span<const double> v(values.data() + r * m, m);
                const std::size_t pick = select_candidate(v, cfg.alpha, cfg.greedy_threshold, rngs[r]);
                tr.chosen.push_back(static_cast<int>(pick) + 1);
                std::copy(cand.row(r * m + pick).begin(), cand.row(r * m + pick).end(), x.row(r).begin());
                if (cfg.keep_states) {
                    const auto k = static_cast<std::size_t>(steps - t);
                    std::copy(x.row(r).begin(), x.row(r).end(), tr.states.row(k + 1).begin());
                    std::copy(v.begin(), v.end(), tr.values.row(k).begin());
                }
                // At t = 1 the candidates are scored at t - 1 = 0, i.e. by the final reward.
                if (t == 1) tr.reward = v[pick];
            }
        }
        for (std::size_t r = 0; r < rows; ++r) out[begin + r].x0.assign(x.row(r).begin(), x.row(r).end());
    });
    return out;
}

}  // namespace rdd
