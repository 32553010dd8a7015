#include "rdd/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdd/log.hpp"
#include "rdd/parallel.hpp"

namespace rdd {

namespace {

constexpr double kStdFloor = 1e-8;

}  // namespace

std::pair<Matrix, NormStats> normalize(const Matrix& rows) {
    if (rows.rows < 2) throw ArgumentError("normalize: at least 2 rows required");
    const std::size_t n = rows.rows;
    const std::size_t d = rows.cols;
    NormStats stats;
    stats.mean.assign(d, 0.0);
    stats.std.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) stats.mean[j] += rows(i, j);
    }
    for (auto& m : stats.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = rows(i, j) - stats.mean[j];
            stats.std[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        stats.std[j] = std::sqrt(stats.std[j] / static_cast<double>(n));
        if (!(stats.std[j] >= kStdFloor)) {
            log::warn("normalize: column " + std::to_string(j) + " is (near) constant; std floored at 1e-8");
            stats.std[j] = kStdFloor;
        }
    }
    return {normalize_with(rows, stats), stats};
}

Matrix normalize_with(const Matrix& rows, const NormStats& stats) {
    if (stats.mean.size() != rows.cols || stats.std.size() != rows.cols) {
        throw ArgumentError("normalize: stats dimension mismatch");
    }
    Matrix out(rows.rows, rows.cols);
    for (std::size_t i = 0; i < rows.rows; ++i) {
        for (std::size_t j = 0; j < rows.cols; ++j) out(i, j) = (rows(i, j) - stats.mean[j]) / stats.std[j];
    }
    return out;
}

DesignVector denormalize(std::span<const double> x, const NormStats& stats) {
    if (stats.mean.size() != x.size() || stats.std.size() != x.size()) {
        throw ArgumentError("denormalize: stats dimension mismatch");
    }
    DesignVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] * stats.std[j] + stats.mean[j];
    return out;
}

Matrix denormalize(const Matrix& rows, const NormStats& stats) {
    Matrix out(rows.rows, rows.cols);
    for (std::size_t i = 0; i < rows.rows; ++i) {
        const auto r = denormalize(rows.row(i), stats);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

double train_epoch(DenoiserParams& params, OptimizerState& opt, const NoiseSchedule& sched, const Matrix& rows,
                   std::span<const double> weights, std::size_t batch_size, Rng& rng, const AnchorTerm& anchor) {
    if (rows.rows == 0) throw ArgumentError("train_epoch: no rows");
    if (rows.cols != params.arch.dim) throw ConfigError("train_epoch: data dimension does not match model");
    if (!weights.empty() && weights.size() != rows.rows) throw ArgumentError("train_epoch: one weight per row required");
    batch_size = std::max<std::size_t>(1, batch_size);
    const std::size_t d = rows.cols;
    const int steps = sched.steps();

    std::vector<std::size_t> order(rows.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::vector<double> eps_buf(batch_size * d);
    std::vector<NoiseExample> batch;
    std::vector<double> batch_w;
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        batch.clear();
        batch_w.clear();
        for (std::size_t k = start; k < end; ++k) {
            const std::size_t idx = order[k];
            const int t = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(steps)));
            std::span<double> eps(eps_buf.data() + (k - start) * d, d);
            rng.fill_normal(eps);
            batch.push_back({rows.row(idx), t, eps});
            batch_w.push_back(weights.empty() ? 1.0 : weights[idx]);
        }
        auto lg = loss_and_grad(params, batch, sched, batch_w, anchor);
        if (!std::isfinite(lg.loss)) throw TrainingDivergence("train_epoch: non-finite loss");
        adam_step(params, opt, lg.grad);
        loss_sum += lg.loss;
        ++n_batches;
    }
    return loss_sum / static_cast<double>(n_batches);
}

TrainResult train_ddpm(const Matrix& rows, const NoiseSchedule& sched, const DenoiserArch& arch,
                       const TrainConfig& cfg, const std::function<void(int, double)>& on_epoch) {
    if (cfg.epochs < 0) throw ConfigError("train_ddpm: epochs must be >= 0");
    if (arch.dim != rows.cols) throw ConfigError("train_ddpm: architecture dim does not match dataset");
    TrainResult res{DenoiserParams::init(arch, derive_seed(cfg.seed, 0)), {}, {}};
    res.optimizer = OptimizerState::fresh(res.params.values.size(), cfg.adam);
    Rng rng(derive_seed(cfg.seed, 1));
    for (int e = 0; e < cfg.epochs; ++e) {
        DenoiserParams last_good = res.params;
        double loss = 0.0;
        try {
            loss = train_epoch(res.params, res.optimizer, sched, rows, {}, cfg.batch_size, rng);
        } catch (const TrainingDivergence& err) {
            throw TrainingAborted(std::string("train_ddpm: epoch ") + std::to_string(e) + ": " + err.what(),
                                  std::move(last_good));
        }
        res.epoch_loss.push_back(loss);
        if (on_epoch) on_epoch(e, loss);
    }
    return res;
}

ChainResult run_reverse_chain(const PolicySelector& policy, const NoiseSchedule& sched, std::size_t dim,
                              std::size_t n, std::uint64_t seed, const ChainOptions& opts) {
    const int steps = sched.steps();
    ChainResult res;
    res.final = Matrix(n, dim);
    if (opts.keep_states) res.states.assign(n, Matrix(static_cast<std::size_t>(steps) + 1, dim));
    const StreamLayout streams{seed};

    parallel_chunks(n, opts.chunk, opts.threads, [&](std::size_t begin, std::size_t end) {
        const std::size_t rows = end - begin;
        Matrix x(rows, dim);
        for (std::size_t r = 0; r < rows; ++r) {
            Rng rng = streams.initial(begin + r);
            rng.fill_normal(x.row(r));
            if (opts.keep_states) std::copy(x.row(r).begin(), x.row(r).end(), res.states[begin + r].row(0).begin());
        }
        std::vector<int> ts(rows);
        std::vector<double> z(dim);
        Matrix next(rows, dim);
        for (int t = steps; t >= 1; --t) {
            std::fill(ts.begin(), ts.end(), t);
            const Matrix eps = predict_noise_batch(policy(t), x, ts);
            for (std::size_t r = 0; r < rows; ++r) {
                Rng rng = streams.step(begin + r, t);
                rng.fill_normal(z);
                reverse_step_into(x.row(r), t, eps.row(r), sched, z, next.row(r));
                if (opts.keep_states) {
                    auto dst = res.states[begin + r].row(static_cast<std::size_t>(steps - t + 1));
                    std::copy(next.row(r).begin(), next.row(r).end(), dst.begin());
                }
            }
            std::swap(x, next);
        }
        for (std::size_t r = 0; r < rows; ++r) std::copy(x.row(r).begin(), x.row(r).end(), res.final.row(begin + r).begin());
    });
    return res;
}

std::vector<DesignVector> ancestral_sample(const DenoiserParams& params, const NoiseSchedule& sched, std::size_t n,
                                           std::uint64_t seed, unsigned threads) {
    ChainOptions opts;
    opts.threads = threads;
    const auto res = run_reverse_chain([&](int) -> const DenoiserParams& { return params; }, sched, params.arch.dim, n,
                                       seed, opts);
    return to_rows(res.final);
}

std::vector<DesignVector> to_rows(const Matrix& m) {
    std::vector<DesignVector> out(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
    return out;
}

Matrix from_rows(const std::vector<DesignVector>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols) throw ArgumentError("from_rows: ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

}  // namespace rdd
